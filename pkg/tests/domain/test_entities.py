"""Tests for domain entities: construction checks and derived properties."""
from __future__ import annotations

import pytest

from card_lab.domain.entities import (
    EpochParams,
    GameConfig,
    MinOrderRandomness,
    MtbeSchedule,
    Transcript,
    TurnRecord,
)
from card_lab.domain.exceptions import ParamError


def test_game_config_rejects_empty_deck() -> None:
    with pytest.raises(ParamError):
        GameConfig(n=0, m=0)


def test_game_config_rejects_negative_budget() -> None:
    with pytest.raises(ParamError):
        GameConfig(n=4, m=-1)


def test_game_config_rejects_oversized_seed() -> None:
    with pytest.raises(ParamError):
        GameConfig(n=4, m=0, master_seed=1 << 64)


def test_transcript_draws_and_guesses() -> None:
    turns = [
        TurnRecord(t=1, guess=2, draw=1, reasonable=True, correct=False),
        TurnRecord(t=2, guess=2, draw=2, reasonable=True, correct=True),
    ]
    transcript = Transcript(config=GameConfig(n=2, m=0), turns=turns)
    assert transcript.draws == [1, 2]
    assert transcript.guesses == [2, 2]


def test_epoch_params_end_and_covers() -> None:
    epoch = EpochParams(k=8, ell=2, u=2)
    assert epoch.end == 6
    assert epoch.covers(8)
    assert epoch.covers(7)
    assert not epoch.covers(6)
    assert not epoch.covers(9)


def test_epoch_params_rejects_large_u() -> None:
    with pytest.raises(ParamError):
        EpochParams(k=4, ell=3, u=2)  # u > k - ell


def test_epoch_params_rejects_zero_length() -> None:
    with pytest.raises(ParamError):
        EpochParams(k=4, ell=0, u=0)


def test_mtbe_schedule_epochs(toy_schedule: MtbeSchedule) -> None:
    assert [e.k for e in toy_schedule.epochs] == [8, 6]
    assert toy_schedule.start_of(2) == 6
    assert all(e.ell == 2 and e.u == 2 for e in toy_schedule.epochs)


def test_mtbe_schedule_rejects_cutoff_inside_epochs() -> None:
    with pytest.raises(ParamError):
        MtbeSchedule(n=16, m=2, k1=8, ell=2, d=2, final_cutoff=5, u=2)


def test_min_order_randomness_without_reserved() -> None:
    randomness = MinOrderRandomness(reserved=frozenset({1, 2}), key=99)
    stripped = randomness.without_reserved()
    assert stripped.reserved is None
    assert stripped.key == 99
