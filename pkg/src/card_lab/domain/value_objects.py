from __future__ import annotations

from enum import Enum


class GuesserKind(str, Enum):
    """Guesser strategies, keyed by the names accepted on the command line.

    Using (str, Enum) for Python 3.10 compatibility (StrEnum requires 3.11+).
    """

    MEMORYLESS = "memoryless"
    PERFECT = "perfect"
    SUBSET = "subset"
    POWER_SUM = "power_sum"
    COMBINED = "combined"
    FOLLOWING = "following"
    RANDOMIZED = "randomized"
    AMPLIFIED = "amplified"


class DealerKind(str, Enum):
    """Dealer strategies, keyed by their command-line names."""

    SHUFFLE = "shuffle"
    STATIC = "static"
    STATIC_ADVERSARIAL = "static-adversarial"
    MTBE = "mtbe"
    MTBE_MINORDER = "mtbe-minorder"
    UNIVERSAL = "universal"


class ArrangementPattern(str, Enum):
    """Named static arrangements."""

    IDENTITY = "identity"
    REVERSE = "reverse"
    BIT_REVERSAL = "bit_reversal"
    RANDOM = "random"


class CodecKind(str, Enum):
    ORDERED = "ordered"
    UNORDERED = "unordered"


class TheoryCurve(str, Enum):
    """Closed-form expected-score curves."""

    HALF_LOG = "half_log"
    GENERAL_DELTA = "general_delta"
    QUARTER_LN = "quarter_ln"
    SUBSET = "subset"
    COMBINED = "combined"
    STATIC_BOUND = "static_bound"
    ADAPTIVE_BOUND = "adaptive_bound"
    UNIVERSAL_BOUND = "universal_bound"
    HARMONIC = "harmonic"
    MEMORYLESS = "memoryless"
    POWER_SUM = "power_sum"
    AMPLIFIED = "amplified"
