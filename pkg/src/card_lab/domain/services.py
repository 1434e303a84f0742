from __future__ import annotations

import math
from fractions import Fraction

from card_lab.domain.entities import ScoreSummary, Transcript


def score(transcript: Transcript) -> ScoreSummary:
    """Count correct and reasonable guesses, overall and per epoch."""
    correct_flags = tuple(turn.correct for turn in transcript.turns)
    reasonable_flags = tuple(turn.reasonable for turn in transcript.turns)
    epoch_correct: dict[int, int] = {}
    epoch_reasonable: dict[int, int] = {}
    for turn in transcript.turns:
        if turn.epoch is None:
            continue
        epoch_correct[turn.epoch] = epoch_correct.get(turn.epoch, 0) + int(turn.correct)
        epoch_reasonable[turn.epoch] = epoch_reasonable.get(turn.epoch, 0) + int(turn.reasonable)
    return ScoreSummary(
        correct=sum(correct_flags),
        reasonable=sum(reasonable_flags),
        correct_flags=correct_flags,
        reasonable_flags=reasonable_flags,
        epoch_correct=epoch_correct,
        epoch_reasonable=epoch_reasonable,
    )


def harmonic(n: int) -> float:
    """H_n = 1 + 1/2 + ... + 1/n, summed exactly before rounding."""
    if n <= 0:
        return 0.0
    return float(sum(Fraction(1, i) for i in range(1, n + 1)))


def ceil_log2(x: int) -> int:
    """Bits needed to write any integer in [0, x); 0 when x <= 1."""
    if x <= 1:
        return 0
    return (x - 1).bit_length()


def is_power_of_two(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


def log2_comb(n: int, k: int) -> float:
    """log2 C(n, k) via log-gamma."""
    if k < 0 or k > n:
        return -math.inf
    return (math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)) / math.log(2)


def log2_falling(n: int, k: int) -> float:
    """log2 of n * (n-1) * ... * (n-k+1)."""
    if k < 0 or k > n:
        return -math.inf
    return (math.lgamma(n + 1) - math.lgamma(n - k + 1)) / math.log(2)
