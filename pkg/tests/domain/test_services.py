"""Tests for domain service pure functions."""
from __future__ import annotations

import math

import pytest

from card_lab.domain.entities import GameConfig, Transcript, TurnRecord
from card_lab.domain.services import (
    ceil_log2,
    harmonic,
    is_power_of_two,
    log2_comb,
    log2_falling,
    score,
)


def make_transcript(*turns: tuple[int, int, bool, int | None]) -> Transcript:
    records = [
        TurnRecord(t=i, guess=g, draw=d, reasonable=r, correct=g == d, epoch=e)
        for i, (g, d, r, e) in enumerate(turns, start=1)
    ]
    return Transcript(config=GameConfig(n=len(records), m=0), turns=records)


# ---------------------------------------------------------------------------
# score
# ---------------------------------------------------------------------------

def test_score_counts_correct_and_reasonable() -> None:
    transcript = make_transcript((1, 1, True, None), (1, 2, False, None), (3, 3, True, None))
    summary = score(transcript)
    assert summary.correct == 2
    assert summary.reasonable == 2
    assert summary.correct_flags == (True, False, True)


def test_score_groups_by_epoch() -> None:
    transcript = make_transcript(
        (1, 2, True, None), (3, 3, True, 1), (4, 5, True, 1), (6, 6, True, 2)
    )
    summary = score(transcript)
    assert summary.epoch_correct == {1: 1, 2: 1}
    assert summary.epoch_reasonable == {1: 2, 2: 1}


def test_score_empty_transcript() -> None:
    summary = score(Transcript(config=GameConfig(n=1, m=0)))
    assert summary.correct == 0
    assert summary.epoch_correct == {}


# ---------------------------------------------------------------------------
# numbers
# ---------------------------------------------------------------------------

def test_harmonic_exact_small() -> None:
    assert harmonic(1) == 1.0
    assert harmonic(10) == pytest.approx(2.928968, abs=1e-6)


def test_harmonic_thousand() -> None:
    assert harmonic(1000) == pytest.approx(7.485471, abs=1e-6)


def test_harmonic_nonpositive() -> None:
    assert harmonic(0) == 0.0


@pytest.mark.parametrize(
    ("x", "expected"), [(0, 0), (1, 0), (2, 1), (3, 2), (4, 2), (5, 3), (1024, 10), (1025, 11)]
)
def test_ceil_log2(x: int, expected: int) -> None:
    assert ceil_log2(x) == expected


def test_is_power_of_two() -> None:
    assert is_power_of_two(1)
    assert is_power_of_two(4096)
    assert not is_power_of_two(0)
    assert not is_power_of_two(12)


def test_log2_comb_matches_exact() -> None:
    assert log2_comb(64, 8) == pytest.approx(math.log2(math.comb(64, 8)))
    assert log2_comb(3, 5) == -math.inf


def test_log2_falling_matches_exact() -> None:
    assert log2_falling(12, 6) == pytest.approx(math.log2(math.perm(12, 6)))
