from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, field

from card_lab.application.config import GuesserSpec
from card_lab.application.registry import build_guesser, declared_bits
from card_lab.domain.codec import (
    codeword_length_o,
    codeword_length_u,
    decode_ordered,
    decode_unordered,
    encode_ordered,
    encode_unordered,
    explicit_length_o,
    explicit_length_u,
)
from card_lab.domain.combinatorics import falling
from card_lab.domain.entities import MinOrderRandomness, MtbeSchedule
from card_lab.domain.exceptions import ParamError
from card_lab.domain.randomness import derive_streams
from card_lab.domain.value_objects import CodecKind, GuesserKind

logger = logging.getLogger(__name__)

COMPRESSION_MARGINS = (1, 2, 3)


@dataclass
class CampaignResult:
    """Outcome of a batch of random encode/decode round trips."""

    codec: CodecKind
    n: int
    k: int
    alpha: int
    trials: int = 0
    passed: int = 0
    length_mismatches: int = 0  # emitted length differs from the analytic one
    indicator_ones: int = 0
    lengths: Counter[int] = field(default_factory=Counter)
    entropy_bits: float = 0.0  # log2 of the number of possible inputs
    compressed: dict[int, int] = field(default_factory=dict)  # beta -> count >= beta bits below

    @property
    def failed(self) -> int:
        return self.trials - self.passed

    def compression_rate(self, beta: int) -> float:
        return self.compressed.get(beta, 0) / self.trials if self.trials else 0.0

    def record(self, length: int, expected: int, indicator: int, ok: bool) -> None:
        self.trials += 1
        self.passed += int(ok)
        self.length_mismatches += int(length != expected)
        self.indicator_ones += indicator
        self.lengths[length] += 1
        for beta in COMPRESSION_MARGINS:
            if length <= self.entropy_bits - beta:
                self.compressed[beta] = self.compressed.get(beta, 0) + 1


def toy_schedule(n: int, k1: int, ell: int = 2, epochs: int = 2, m: int = 2) -> MtbeSchedule:
    """Hand-built MtBE schedule for codec runs: u = ell, cutoff right after the last epoch."""
    return MtbeSchedule(
        n=n, m=m, k1=k1, ell=ell, d=epochs, final_cutoff=k1 - epochs * ell, u=ell
    )


def default_guesser(codec: CodecKind) -> GuesserSpec:
    if codec is CodecKind.ORDERED:
        return GuesserSpec(kind=GuesserKind.PERFECT)
    return GuesserSpec(kind=GuesserKind.SUBSET, m=2)


def roundtrip_campaign(
    codec: CodecKind,
    n: int,
    k: int,
    alpha: int,
    trials: int,
    seed: int = 0,
    guesser: GuesserSpec | None = None,
    ell: int = 2,
    epoch: int = 1,
) -> CampaignResult:
    """Encode and decode ``trials`` random instances and tally the outcome.

    Ordered: a random arrangement of 1..n, describing its last k cards.
    Unordered: a random k-card reserved set for the min-order dealer on a toy
    schedule with k1 = k.
    """
    if not 0 < k <= n:
        raise ParamError(f"k must lie in 1..{n}, got {k}")
    spec = guesser or default_guesser(codec)
    handle = build_guesser(spec)
    logger.info("Codec campaign %s n=%d k=%d alpha=%d trials=%d", codec.value, n, k, alpha, trials)
    if codec is CodecKind.ORDERED:
        result = CampaignResult(codec, n, k, alpha, entropy_bits=math.log2(falling(n, k)))
        for trial in range(trials):
            streams = derive_streams(seed, trial)
            deck = (streams.dealer_stream.generator().permutation(n) + 1).tolist()
            prefix, suffix = deck[: n - k], tuple(deck[n - k :])
            bits = encode_ordered(handle, streams.guesser, suffix, prefix, alpha)
            m = handle.declared_bits
            indicator = int(bits[0])
            expected = codeword_length_o(m, k, alpha, n) if indicator else explicit_length_o(k, n)
            decoded = decode_ordered(bits, handle, streams.guesser, alpha, k, n)
            result.record(len(bits), expected, indicator, decoded == suffix)
        return result

    schedule = toy_schedule(n, k, ell=ell, m=declared_bits(spec, n))
    result = CampaignResult(codec, n, k, alpha, entropy_bits=math.log2(math.comb(n, k)))
    for trial in range(trials):
        streams = derive_streams(seed, trial)
        rng = streams.dealer_stream.generator()
        reserved = frozenset((rng.choice(n, size=k, replace=False) + 1).tolist())
        randomness = MinOrderRandomness(reserved=reserved, key=streams.dealer_stream.word(1))
        bits = encode_unordered(
            reserved, handle, streams.guesser, randomness, alpha, epoch, schedule
        )
        indicator = int(bits[0])
        m = handle.declared_bits
        expected = (
            codeword_length_u(m, k, schedule.ell, alpha, n)
            if indicator
            else explicit_length_u(k, n)
        )
        decoded = decode_unordered(
            bits, handle, streams.guesser, randomness.without_reserved(), alpha, epoch, schedule
        )
        result.record(len(bits), expected, indicator, decoded == reserved)
    return result

