"""Reproducible random streams keyed by (master seed, trial, stream id).

Keys come from a counter-based splitmix64 mix, so any trial can be replayed
without running the trials before it. Long runs of draws use numpy's PCG64
seeded with the key; per-turn draws that must be replayable from a turn index
alone use :meth:`SeededStream.below`.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from card_lab.domain.entities import MAX_SEED
from card_lab.domain.exceptions import ParamError

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


class StreamId(IntEnum):
    GUESSER_LONG_LIVED = 1
    GUESSER_ON_THE_FLY = 2
    DEALER = 3
    ARRANGEMENT = 4  # static "random" arrangements, shared by every trial


def splitmix64(x: int) -> int:
    z = (x + GOLDEN_GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def mix(*words: int) -> int:
    """Fold words into one 64-bit key."""
    h = 0
    for word in words:
        h = splitmix64(h ^ (word & MASK64))
    return h


def derive_key(master_seed: int, trial_index: int, stream_id: int) -> int:
    if not 0 <= master_seed <= MAX_SEED:
        raise ParamError("master_seed must be a 64-bit unsigned integer")
    if trial_index < 0:
        raise ParamError("trial_index must be non-negative")
    return mix(master_seed, trial_index, int(stream_id))


@dataclass(frozen=True)
class SeededStream:
    """A keyed random source; equal keys give identical outputs."""

    key: int

    def generator(self) -> np.random.Generator:
        """A fresh numpy generator positioned at the start of this stream."""
        return np.random.Generator(np.random.PCG64(self.key))

    def word(self, counter: int) -> int:
        """The 64-bit output at position ``counter``."""
        return mix(self.key, counter)

    def below(self, counter: int, bound: int) -> int:
        """Integer in [0, bound) addressed by ``counter``."""
        if bound <= 0:
            raise ParamError(f"bound must be positive, got {bound}")
        return (self.word(counter) * bound) >> 64

    def child(self, label: int) -> SeededStream:
        return SeededStream(mix(self.key, label, 0x5EED))


@dataclass(frozen=True)
class GuesserRandomness:
    """The guesser's two streams: rereadable long-lived bits and read-once bits."""

    long_lived: SeededStream
    on_the_fly: SeededStream


@dataclass(frozen=True)
class RandomnessStreams:
    guesser_long_lived: SeededStream
    guesser_on_the_fly: SeededStream
    dealer_stream: SeededStream

    @property
    def guesser(self) -> GuesserRandomness:
        return GuesserRandomness(self.guesser_long_lived, self.guesser_on_the_fly)


def derive_streams(master_seed: int, trial_index: int) -> RandomnessStreams:
    """Deterministic, pairwise independent streams for one trial."""
    return RandomnessStreams(
        guesser_long_lived=SeededStream(
            derive_key(master_seed, trial_index, StreamId.GUESSER_LONG_LIVED)
        ),
        guesser_on_the_fly=SeededStream(
            derive_key(master_seed, trial_index, StreamId.GUESSER_ON_THE_FLY)
        ),
        dealer_stream=SeededStream(derive_key(master_seed, trial_index, StreamId.DEALER)),
    )
