from __future__ import annotations

from dataclasses import dataclass, field

from card_lab.domain.exceptions import ParamError

MAX_SEED = (1 << 64) - 1


@dataclass(frozen=True)
class GameConfig:
    """Size, memory budget and seed of one game."""

    n: int  # deck size, cards are labelled 1..n
    m: int  # guesser memory budget in bits
    master_seed: int = 0
    enforce_memory: bool = False  # serialize and measure guesser state every turn

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ParamError(f"Deck size must be at least 1, got {self.n}")
        if self.m < 0:
            raise ParamError(f"Memory budget must be non-negative, got {self.m}")
        if not 0 <= self.master_seed <= MAX_SEED:
            raise ParamError("master_seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class TurnRecord:
    """One turn of a game: the guess, the drawn card and how the guess fared."""

    t: int
    guess: int
    draw: int
    reasonable: bool  # guess was drawable by the dealer at guess time
    correct: bool
    epoch: int | None = None  # 1-based epoch index for epoch dealers


@dataclass
class Transcript:
    """Full record of one game."""

    config: GameConfig
    turns: list[TurnRecord] = field(default_factory=list)
    peak_state_bits: int = 0

    @property
    def draws(self) -> list[int]:
        return [turn.draw for turn in self.turns]

    @property
    def guesses(self) -> list[int]:
        return [turn.guess for turn in self.turns]


@dataclass(frozen=True)
class ScoreSummary:
    correct: int
    reasonable: int
    correct_flags: tuple[bool, ...]
    reasonable_flags: tuple[bool, ...]
    epoch_correct: dict[int, int] = field(default_factory=dict)
    epoch_reasonable: dict[int, int] = field(default_factory=dict)


@dataclass(frozen=True)
class EpochParams:
    """A (k, ell)-epoch: starts with k cards left, lasts ell turns, moves at most u cards back."""

    k: int
    ell: int
    u: int

    def __post_init__(self) -> None:
        if not 1 <= self.ell <= self.k:
            raise ParamError(f"Epoch needs 1 <= ell <= k, got k={self.k}, ell={self.ell}")
        if not 0 <= self.u <= min(self.k - self.ell, self.ell):
            raise ParamError(
                f"Epoch needs 0 <= u <= min(k - ell, ell), got k={self.k}, "
                f"ell={self.ell}, u={self.u}"
            )

    @property
    def end(self) -> int:
        """Cards left once the epoch is over."""
        return self.k - self.ell

    def covers(self, cards_left: int) -> bool:
        return self.end < cards_left <= self.k


@dataclass(frozen=True)
class MtbeSchedule:
    """Phase layout of the Move-to-the-Back-Epoch dealer."""

    n: int
    m: int
    k1: int  # cards left when the first epoch starts
    ell: int  # common epoch length
    d: int  # number of epochs
    final_cutoff: int  # cards left at the last reshuffle
    u: int  # back-move limit per epoch

    def __post_init__(self) -> None:
        if self.d < 1:
            raise ParamError("Schedule needs at least one epoch")
        if not 0 < self.k1 <= self.n:
            raise ParamError(f"k1 must lie in 1..n, got {self.k1}")
        if self.k1 - self.d * self.ell < 0 or self.final_cutoff > self.k1 - self.d * self.ell:
            raise ParamError("Epochs must end before the final cutoff")

    def start_of(self, i: int) -> int:
        """Cards left at the start of epoch i (1-based)."""
        return self.k1 - (i - 1) * self.ell

    @property
    def epochs(self) -> tuple[EpochParams, ...]:
        return tuple(EpochParams(self.start_of(i), self.ell, self.u) for i in range(1, self.d + 1))


@dataclass(frozen=True)
class UniversalSchedule:
    """Epoch list of the universal dealer; may be empty at desk-scale n."""

    n: int
    k1: int
    epochs: tuple[EpochParams, ...]
    tail_cutoff: int
    d: int  # epoch count from the closed form, before feasibility filtering

    @property
    def final_cutoff(self) -> int:
        return self.tail_cutoff


@dataclass(frozen=True)
class MinOrderRandomness:
    """Dealer randomness for the min-order MtBE implementation.

    Either ``permutations`` lists pi_1..pi_n explicitly (each a permutation of 1..n,
    earlier position = smaller order), or the orders are derived lazily from ``key``.
    ``reserved`` is the set D held back for the final phase; decoders receive it as None.
    """

    reserved: frozenset[int] | None
    permutations: tuple[tuple[int, ...], ...] | None = None
    key: int = 0

    def without_reserved(self) -> MinOrderRandomness:
        return MinOrderRandomness(reserved=None, permutations=self.permutations, key=self.key)


@dataclass(frozen=True)
class StatResult:
    """Monte Carlo estimates over ``trials`` independent games."""

    trials: int
    mean_correct: float
    stderr_correct: float
    mean_reasonable: float
    stderr_reasonable: float
    epoch_reasonable: tuple[float, ...] = ()  # r_i estimates, one per epoch
    epoch_reasonable_stderr: tuple[float, ...] = ()
    epoch_correct: tuple[float, ...] = ()  # c_i estimates
    epoch_correct_stderr: tuple[float, ...] = ()
    epoch_phase_correct: float = 0.0  # mean of the per-game sum over all epochs
    epoch_phase_correct_stderr: float = 0.0
