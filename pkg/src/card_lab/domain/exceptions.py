from __future__ import annotations


class CardLabError(Exception):
    """Base exception for all card-guessing lab errors."""


class ParamError(CardLabError):
    """Raised when strategy parameters violate their preconditions."""


class MemoryBudgetExceeded(CardLabError):
    """Raised when a guesser's serialized state is longer than its memory budget."""

    def __init__(self, bits: int, budget: int, turn: int) -> None:
        self.bits = bits
        self.budget = budget
        self.turn = turn  # 0 means right after initialisation
        super().__init__(f"Guesser state is {bits} bits at turn {turn}, budget is {budget}")


class ProtocolViolation(CardLabError):
    """Raised when a dealer draws a card that was already drawn or is not in the deck."""


class RecoveryInconsistent(CardLabError):
    """Raised when power-sum recovery finds the wrong number of missing cards."""


class InvalidArrangement(CardLabError):
    """Raised when a static arrangement is not a permutation of 1..n."""


class NotDeterministic(CardLabError):
    """Raised when an operation needs a guesser that uses no randomness."""


class Infeasible(CardLabError):
    """Raised when a dealer schedule cannot be realised at the requested size."""

    def __init__(self, n: int, m: int, reason: str) -> None:
        self.n = n
        self.m = m
        self.reason = reason
        super().__init__(f"Infeasible schedule for n={n}, m={m}: {reason}")


class InvalidRandomness(CardLabError):
    """Raised when min-order dealer randomness does not match the schedule."""


class MalformedCodeword(CardLabError):
    """Raised when a codeword is truncated or carries trailing bits."""


class ScheduleMismatch(CardLabError):
    """Raised when codec parameters (alpha, epoch index) do not fit the schedule."""


class RankOutOfRange(CardLabError):
    """Raised when a combinatorial rank or its input lies outside the valid range."""


class UnknownCurve(CardLabError):
    """Raised when a theory curve name is not known."""


class DivisionByZero(CardLabError, ZeroDivisionError):
    """Raised when inverting the zero element of a finite field."""
