"""Shared pytest fixtures for the card lab test suite."""
from __future__ import annotations

import pytest

from card_lab.domain.entities import GameConfig, MtbeSchedule
from card_lab.domain.randomness import GuesserRandomness, RandomnessStreams, derive_streams


@pytest.fixture
def streams() -> RandomnessStreams:
    """Streams of trial 0 under master seed 7."""
    return derive_streams(7, 0)


@pytest.fixture
def gamma(streams: RandomnessStreams) -> GuesserRandomness:
    return streams.guesser


@pytest.fixture
def small_config() -> GameConfig:
    return GameConfig(n=16, m=0)


@pytest.fixture
def toy_schedule() -> MtbeSchedule:
    """n=16, two 2-turn epochs from 8 cards left, u = ell."""
    return MtbeSchedule(n=16, m=2, k1=8, ell=2, d=2, final_cutoff=4, u=2)


@pytest.fixture
def tiny_schedule() -> MtbeSchedule:
    """n=4, one epoch of 2 turns from 3 cards left, one card may go to the back."""
    return MtbeSchedule(n=4, m=1, k1=3, ell=2, d=1, final_cutoff=1, u=1)
