"""Tests for the ordered and unordered compression codecs."""
from __future__ import annotations

import math
from collections.abc import Callable

import numpy as np
import pytest
from bitarray import bitarray

from card_lab.domain.codec import (
    TOY_SCHEDULE,
    best_prefix,
    codeword_length_o,
    codeword_length_u,
    codeword_length_w,
    compression_diagnostics,
    compression_threshold,
    decode_ordered,
    decode_unordered,
    encode_ordered,
    encode_unordered,
    explicit_length_o,
    explicit_length_u,
)
from card_lab.domain.entities import MinOrderRandomness, MtbeSchedule
from card_lab.domain.exceptions import MalformedCodeword, ParamError, ScheduleMismatch
from card_lab.domain.guessers import (
    Guesser,
    make_following_subsets,
    make_memoryless,
    make_perfect_memory,
)
from card_lab.domain.randomness import GuesserRandomness, derive_streams
from card_lab.domain.services import log2_comb


def make_split(n: int, k: int, seed: int) -> tuple[list[int], list[int]]:
    """(prefix, suffix) of a random arrangement of 1..n."""
    order = (np.random.default_rng(seed).permutation(n) + 1).tolist()
    return order[: n - k], order[n - k :]


def make_reserved(n: int, k1: int, seed: int) -> frozenset[int]:
    return frozenset((np.random.default_rng(seed).choice(n, size=k1, replace=False) + 1).tolist())


def declared_bits(factory: Callable[[], Guesser], n: int, gamma: GuesserRandomness) -> int:
    guesser = factory()
    guesser.start(n, gamma)
    return guesser.declared_bits


GUESSERS: list[Callable[[], Guesser]] = [make_following_subsets, make_perfect_memory]


# ---------------------------------------------------------------------------
# ordered codec
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("factory", GUESSERS)
@pytest.mark.parametrize("alpha", [0, 1, 2])
def test_ordered_round_trip(
    factory: Callable[[], Guesser], alpha: int, gamma: GuesserRandomness
) -> None:
    n, k = 16, 6
    for seed in range(8):
        prefix, suffix = make_split(n, k, seed)
        bits = encode_ordered(factory(), gamma, suffix, prefix, alpha)
        assert decode_ordered(bits, factory(), gamma, alpha, k, n) == tuple(suffix)
        if bits[0]:
            state_bits = declared_bits(factory, n, gamma)
            assert len(bits) == codeword_length_o(state_bits, k, alpha, n)
        else:
            assert len(bits) == explicit_length_o(k, n)


def test_ordered_explicit_branch(gamma: GuesserRandomness) -> None:
    # memoryless guesses card 1, which sits in the prefix, so there are no hits
    prefix, suffix = [1, 2, 3, 4], [5, 6, 7, 8]
    bits = encode_ordered(make_memoryless(1), gamma, suffix, prefix, 1)
    assert bits[0] == 0
    assert len(bits) == explicit_length_o(4, 8)
    assert decode_ordered(bits, make_memoryless(1), gamma, 1, 4, 8) == (5, 6, 7, 8)


def test_ordered_rejects_bad_inputs(gamma: GuesserRandomness) -> None:
    with pytest.raises(ParamError):
        encode_ordered(make_memoryless(1), gamma, [1, 2], [2, 3], 0)
    with pytest.raises(ScheduleMismatch):
        encode_ordered(make_memoryless(1), gamma, [3, 4], [1, 2], 3)


def test_ordered_malformed_codewords(gamma: GuesserRandomness) -> None:
    prefix, suffix = make_split(16, 6, 0)
    bits = encode_ordered(make_following_subsets(), gamma, suffix, prefix, 1)
    with pytest.raises(MalformedCodeword):
        decode_ordered(bits[:-1], make_following_subsets(), gamma, 1, 6, 16)
    with pytest.raises(MalformedCodeword):
        decode_ordered(bits + bitarray("0"), make_following_subsets(), gamma, 1, 6, 16)


def test_ordered_rank_out_of_range(gamma: GuesserRandomness) -> None:
    # an explicit codeword whose rank field is all ones exceeds falling(4, 2) = 12
    bits = bitarray("0") + bitarray("1111")
    with pytest.raises(MalformedCodeword):
        decode_ordered(bits, make_memoryless(1), gamma, 0, 2, 4)


def test_best_prefix_for_following(gamma: GuesserRandomness) -> None:
    prefix, hits = best_prefix(make_following_subsets(), gamma, (4, 3), 4)
    assert prefix == (1, 2)
    assert hits == 1


def test_best_prefix_size_limit(gamma: GuesserRandomness) -> None:
    with pytest.raises(ParamError):
        best_prefix(make_following_subsets(), gamma, (1,), 16)


# ---------------------------------------------------------------------------
# unordered codec
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("epoch", [1, 2])
@pytest.mark.parametrize("alpha", [0, 1, 2])
def test_unordered_round_trip(epoch: int, alpha: int) -> None:
    schedule = TOY_SCHEDULE
    for seed in range(8):
        gamma = derive_streams(seed, 0).guesser
        reserved = make_reserved(schedule.n, schedule.k1, seed)
        randomness = MinOrderRandomness(reserved=None, key=1000 + seed)
        bits = encode_unordered(
            reserved, make_perfect_memory(), gamma, randomness, alpha, epoch, schedule
        )
        decoded = decode_unordered(
            bits, make_perfect_memory(), gamma, randomness, alpha, epoch, schedule
        )
        assert decoded == reserved
        if bits[0]:
            m = declared_bits(make_perfect_memory, schedule.n, gamma)
            expected = codeword_length_u(m, schedule.k1, schedule.ell, alpha, schedule.n)
            assert len(bits) == expected
        else:
            assert len(bits) == explicit_length_u(schedule.k1, schedule.n)


def make_permutations(n: int, seed: int) -> tuple[tuple[int, ...], ...]:
    rng = np.random.default_rng(seed)
    return tuple(tuple((rng.permutation(n) + 1).tolist()) for _ in range(n))


@pytest.mark.parametrize("alpha", [1, 2])
def test_unordered_round_trip_with_explicit_permutations(alpha: int) -> None:
    # one 2-turn epoch from 4 cards left, both guesses may go to the back
    schedule = MtbeSchedule(n=8, m=2, k1=4, ell=2, d=1, final_cutoff=2, u=2)
    gamma = derive_streams(5, 0).guesser
    for seed in range(6):
        randomness = MinOrderRandomness(reserved=None, permutations=make_permutations(8, seed))
        reserved = make_reserved(8, 4, seed)
        bits = encode_unordered(
            reserved, make_following_subsets(), gamma, randomness, alpha, 1, schedule
        )
        decoded = decode_unordered(
            bits, make_following_subsets(), gamma, randomness, alpha, 1, schedule
        )
        assert decoded == reserved


def test_unordered_rejects_partial_back_moves(tiny_schedule: MtbeSchedule) -> None:
    randomness = MinOrderRandomness(reserved=None, permutations=make_permutations(4, 0))
    gamma = derive_streams(5, 0).guesser
    with pytest.raises(ScheduleMismatch):
        encode_unordered(
            {1, 2, 3}, make_following_subsets(), gamma, randomness, 1, 1, tiny_schedule
        )


def test_unordered_trailing_bit(gamma: GuesserRandomness) -> None:
    randomness = MinOrderRandomness(reserved=None, key=3)
    reserved = make_reserved(16, 8, 2)
    bits = encode_unordered(reserved, make_perfect_memory(), gamma, randomness, 1, 1, TOY_SCHEDULE)
    with pytest.raises(MalformedCodeword):
        decode_unordered(
            bits + bitarray("1"), make_perfect_memory(), gamma, randomness, 1, 1, TOY_SCHEDULE
        )


def test_unordered_schedule_mismatch(gamma: GuesserRandomness) -> None:
    randomness = MinOrderRandomness(reserved=None, key=3)
    reserved = make_reserved(16, 8, 2)
    with pytest.raises(ScheduleMismatch):
        encode_unordered(reserved, make_perfect_memory(), gamma, randomness, 1, 3, TOY_SCHEDULE)
    with pytest.raises(ScheduleMismatch):
        encode_unordered(reserved, make_perfect_memory(), gamma, randomness, 3, 1, TOY_SCHEDULE)
    short_back = MtbeSchedule(n=16, m=2, k1=8, ell=2, d=2, final_cutoff=4, u=1)
    with pytest.raises(ScheduleMismatch):
        decode_unordered(bitarray("0"), make_perfect_memory(), gamma, randomness, 1, 1, short_back)


# ---------------------------------------------------------------------------
# length analytics
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("m", [0, 8, 40])
@pytest.mark.parametrize("alpha", [0, 3, 10])
def test_emitted_length_is_within_two_bits_of_w(m: int, alpha: int) -> None:
    n, k1, ell = 1024, 40, 10
    w = codeword_length_w(m, k1, ell, alpha, n)
    u = codeword_length_u(m, k1, ell, alpha, n)
    assert w - 1e-6 <= u < w + 2


def test_codeword_length_w_small_case() -> None:
    # log2(2 * 2 * 2 * C(4, 1) * C(1, 1))
    assert codeword_length_w(1, 2, 1, 1, 4) == pytest.approx(5.0)


def test_codeword_length_w_rejects_alpha() -> None:
    with pytest.raises(ParamError):
        codeword_length_w(0, 10, 4, 5, 100)


def test_explicit_lengths() -> None:
    assert explicit_length_u(3, 16) == 1 + math.ceil(math.log2(560))
    assert explicit_length_o(2, 4) == 1 + 4


def test_compression_threshold() -> None:
    assert compression_threshold(16, 2410, 320, 2**20) == 16
    assert compression_threshold(100, 2410, 320, 2**20) == 100


def test_compression_diagnostics() -> None:
    rows = compression_diagnostics(16, 2410, 320, 2**20, [0, 320])
    assert [row.compressed for row in rows] == [False, True]
    assert rows[0].slack == pytest.approx(-17.0)
    assert rows[1].slack > 0


LENGTH_GRID = [
    (n, k1, ell, m)
    for n in (2**12, 2**14)
    for k1 in (64, 128)
    for ell in (16, 32)
    for m in (4, 8)
]


@pytest.mark.parametrize(("n", "k1", "ell", "m"), LENGTH_GRID)
def test_each_reasonable_guess_saves_a_bit(n: int, k1: int, ell: int, m: int) -> None:
    for alpha in range(math.ceil(4 * k1 * ell / n), min(k1, ell)):
        shorter = codeword_length_w(m, k1, ell, alpha + 1, n)
        assert shorter <= codeword_length_w(m, k1, ell, alpha, n) - 1 + 1e-9


@pytest.mark.parametrize(("n", "k1", "ell", "m"), LENGTH_GRID)
def test_enough_reasonable_guesses_compress(n: int, k1: int, ell: int, m: int) -> None:
    alpha = math.ceil(max(8 * math.e * k1 * ell / n, m))
    assert codeword_length_w(m, k1, ell, alpha, n) < log2_comb(n, k1)


@pytest.mark.parametrize("alpha", [1, 2])
def test_unordered_codewords_rarely_beat_the_entropy(alpha: int) -> None:
    schedule = TOY_SCHEDULE
    entropy = log2_comb(schedule.n, schedule.k1)
    gamma = derive_streams(11, 0).guesser
    samples = 400
    lengths = np.array(
        [
            len(
                encode_unordered(
                    make_reserved(schedule.n, schedule.k1, 500 + seed),
                    make_memoryless(1),
                    gamma,
                    MinOrderRandomness(reserved=None, key=seed),
                    alpha,
                    1,
                    schedule,
                )
            )
            for seed in range(samples)
        ]
    )
    for beta in (1, 2, 3):
        hits = lengths <= entropy - beta
        stderr = math.sqrt(max(hits.mean() * (1 - hits.mean()), 1e-12) / samples)
        assert hits.mean() <= 2.0**-beta + 3 * stderr
