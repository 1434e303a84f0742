"""Compression codecs that replay a game to describe a set of cards.

Both codecs are prefix-free: the first bit selects the branch and every branch
has a fixed length given (n, k, alpha, m). Fields are big-endian and written in
the order indicator, M (guesser state), T, [V], residual.
"""
from __future__ import annotations

import itertools
import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

from bitarray import bitarray

from card_lab.domain.bits import BitReader, BitWriter
from card_lab.domain.combinatorics import (
    falling,
    rank_ordered,
    rank_subset,
    unrank_ordered,
    unrank_subset,
)
from card_lab.domain.dealers import Deck, MinOrderDealer, MinOrderPicker, StaticDealer
from card_lab.domain.engine import GameSession
from card_lab.domain.entities import GameConfig, MinOrderRandomness, MtbeSchedule
from card_lab.domain.exceptions import (
    MalformedCodeword,
    ParamError,
    ProtocolViolation,
    RankOutOfRange,
    ScheduleMismatch,
)
from card_lab.domain.guessers import Guesser
from card_lab.domain.randomness import GuesserRandomness, RandomnessStreams, SeededStream
from card_lab.domain.services import ceil_log2, log2_comb

logger = logging.getLogger(__name__)

BEST_PREFIX_MAX_N = 8

# n=16 with two 2-turn epochs starting at 8 cards left; round trips stay cheap
TOY_SCHEDULE = MtbeSchedule(n=16, m=2, k1=8, ell=2, d=2, final_cutoff=4, u=2)


# ---------------------------------------------------------------------------
# Length analytics
# ---------------------------------------------------------------------------


def codeword_length_w(m: int, k1: int, ell: int, alpha: int, n: int) -> float:
    """w = log2(2 * 2^m * 2^alpha * C(n, k1 - alpha) * C(ell, alpha)), via log-gamma."""
    if not 0 <= alpha <= min(k1, ell):
        raise ParamError(f"alpha must lie in 0..min(k1, ell) = {min(k1, ell)}, got {alpha}")
    return 1 + m + alpha + log2_comb(n, k1 - alpha) + log2_comb(ell, alpha)


def codeword_length_u(m: int, k1: int, ell: int, alpha: int, n: int) -> int:
    """Emitted length of an unordered codeword with indicator 1."""
    return (
        1
        + m
        + ceil_log2(math.comb(ell, alpha))
        + alpha
        + ceil_log2(math.comb(n, k1 - alpha))
    )


def explicit_length_u(k1: int, n: int) -> int:
    return 1 + ceil_log2(math.comb(n, k1))


def codeword_length_o(m: int, k: int, alpha: int, n: int) -> int:
    """Emitted length of an ordered codeword with indicator 1."""
    return 1 + m + ceil_log2(math.comb(k, alpha)) + ceil_log2(falling(n, k - alpha))


def explicit_length_o(k: int, n: int) -> int:
    return 1 + ceil_log2(falling(n, k))


@dataclass(frozen=True)
class CompressionRow:
    alpha: int
    w: float
    slack: float  # H - w, with H = log2 C(n, k1)
    compressed: bool


def compression_diagnostics(
    m: int, k1: int, ell: int, n: int, alphas: Iterable[int]
) -> list[CompressionRow]:
    entropy = log2_comb(n, k1)
    rows = []
    for alpha in alphas:
        w = codeword_length_w(m, k1, ell, alpha, n)
        rows.append(CompressionRow(alpha=alpha, w=w, slack=entropy - w, compressed=w < entropy))
    return rows


def compression_threshold(m: int, k1: int, ell: int, n: int) -> int:
    """Smallest alpha from which compression is guaranteed: ceil(max(8e k1 ell / n, m))."""
    return math.ceil(max(8 * math.e * k1 * ell / n, m))


# ---------------------------------------------------------------------------
# Shared plumbing
# ---------------------------------------------------------------------------


def _streams(gamma: GuesserRandomness) -> RandomnessStreams:
    # the dealers used here take no randomness from their stream
    return RandomnessStreams(gamma.long_lived, gamma.on_the_fly, SeededStream(0))


def _session(
    guesser: Guesser,
    dealer: StaticDealer | MinOrderDealer,
    n: int,
    gamma: GuesserRandomness,
) -> GameSession:
    guesser.start(n, gamma)  # sizes the layout before the config is built
    config = GameConfig(n=n, m=guesser.declared_bits)
    return GameSession(guesser, dealer, config, _streams(gamma))


def _advance(session: GameSession, turns: int) -> None:
    while session.t < turns:
        session.step()


# ---------------------------------------------------------------------------
# Ordered codec: the last k cards of a static arrangement
# ---------------------------------------------------------------------------


def encode_ordered(
    guesser: Guesser,
    gamma: GuesserRandomness,
    suffix: Sequence[int],
    prefix: Sequence[int],
    alpha: int,
) -> bitarray:
    """Describe the ordered suffix using the guesser's correct guesses on it."""
    n, k = len(prefix) + len(suffix), len(suffix)
    if sorted([*prefix, *suffix]) != list(range(1, n + 1)):
        raise ParamError("prefix and suffix must partition 1..n")
    if not 0 <= alpha <= k:
        raise ScheduleMismatch(f"alpha must lie in 0..{k}, got {alpha}")
    session = _session(guesser, StaticDealer([*prefix, *suffix]), n, gamma)
    _advance(session, n - k)
    state = guesser.export_state()
    session.play_out()
    tail = session.transcript.turns[n - k :]
    hits = [p for p, turn in enumerate(tail, start=1) if turn.correct]

    writer = BitWriter()
    if len(hits) < alpha:
        writer.write(0, 1)
        writer.write(rank_ordered(suffix, n).rank, ceil_log2(falling(n, k)))
        return writer.getvalue()
    tagged = set(hits[:alpha])
    residual = [card for p, card in enumerate(suffix, start=1) if p not in tagged]
    writer.write(1, 1)
    writer.write_bits(state)
    writer.write(rank_subset(tagged, k).rank, ceil_log2(math.comb(k, alpha)))
    writer.write(rank_ordered(residual, n).rank, ceil_log2(falling(n, k - alpha)))
    return writer.getvalue()


def decode_ordered(
    bits: bitarray,
    guesser: Guesser,
    gamma: GuesserRandomness,
    alpha: int,
    k: int,
    n: int,
) -> tuple[int, ...]:
    """Rebuild the ordered suffix, taking the guesser's own guess at tagged turns."""
    try:
        reader = BitReader(bits)
        if reader.read(1) == 0:
            suffix = unrank_ordered(reader.read(ceil_log2(falling(n, k))), n, k)
            reader.finish()
            return suffix
        guesser.start(n, gamma)
        state = reader.read_bits(guesser.declared_bits)
        tagged = unrank_subset(reader.read(ceil_log2(math.comb(k, alpha))), k, alpha)
        residual = iter(unrank_ordered(reader.read(ceil_log2(falling(n, k - alpha))), n, k - alpha))
        reader.finish()
        guesser.import_state(state)
        out: list[int] = []
        for p in range(1, k + 1):
            t = n - k + p
            card = guesser.guess(t) if p in tagged else next(residual)
            guesser.observe(t, card)
            out.append(card)
    except (RankOutOfRange, StopIteration) as exc:
        raise MalformedCodeword(f"Ordered codeword does not decode: {exc}") from exc
    return tuple(out)


def best_prefix(
    guesser: Guesser,
    gamma: GuesserRandomness,
    suffix: Sequence[int],
    n: int,
) -> tuple[tuple[int, ...], int]:
    """Prefix arrangement that maximises correct guesses on the suffix, by exhaustion."""
    if n > BEST_PREFIX_MAX_N:
        raise ParamError(f"Best-prefix search is limited to n <= {BEST_PREFIX_MAX_N}")
    rest = sorted(set(range(1, n + 1)) - set(suffix))
    k = len(suffix)
    best: tuple[tuple[int, ...], int] = (tuple(rest), -1)
    for prefix in itertools.permutations(rest):
        session = _session(guesser, StaticDealer([*prefix, *suffix]), n, gamma)
        turns = session.play_out().turns[n - k :]
        hits = sum(turn.correct for turn in turns)
        if hits > best[1]:
            best = (prefix, hits)
    return best


# ---------------------------------------------------------------------------
# Unordered codec: the reserved set D of the min-order MtBE dealer
# ---------------------------------------------------------------------------


def check_unordered(schedule: MtbeSchedule, alpha: int, epoch: int) -> None:
    if not 1 <= epoch <= schedule.d:
        raise ScheduleMismatch(f"Epoch {epoch} outside 1..{schedule.d}")
    if schedule.u != schedule.ell:
        raise ScheduleMismatch("Replay needs u == ell in every epoch")
    if not 0 <= alpha <= min(schedule.ell, schedule.u, schedule.k1):
        raise ScheduleMismatch(f"alpha={alpha} exceeds the epoch bounds")


def encode_unordered(
    reserved: Iterable[int],
    guesser: Guesser,
    gamma: GuesserRandomness,
    randomness: MinOrderRandomness,
    alpha: int,
    epoch: int,
    schedule: MtbeSchedule,
) -> bitarray:
    """Describe D using the first alpha reasonable guesses of the given epoch."""
    check_unordered(schedule, alpha, epoch)
    n, k1, ell = schedule.n, schedule.k1, schedule.ell
    cards = frozenset(reserved)
    full = MinOrderRandomness(cards, randomness.permutations, randomness.key)
    session = _session(guesser, MinOrderDealer(schedule, full), n, gamma)
    _advance(session, n - k1)
    state = guesser.export_state()
    epoch_end = n - schedule.start_of(epoch) + ell
    _advance(session, epoch_end)
    in_epoch = [turn for turn in session.transcript.turns if turn.epoch == epoch]
    hits = [(p, turn) for p, turn in enumerate(in_epoch, start=1) if turn.reasonable][:alpha]

    writer = BitWriter()
    if len(hits) < alpha:
        writer.write(0, 1)
        writer.write(rank_subset(cards, n).rank, ceil_log2(math.comb(n, k1)))
        return writer.getvalue()
    guessed = {turn.guess for _, turn in hits}
    writer.write(1, 1)
    writer.write_bits(state)
    writer.write(rank_subset([p for p, _ in hits], ell).rank, ceil_log2(math.comb(ell, alpha)))
    for _, turn in hits:
        writer.write(int(turn.correct), 1)
    writer.write(rank_subset(cards - guessed, n).rank, ceil_log2(math.comb(n, k1 - alpha)))
    return writer.getvalue()


def decode_unordered(
    bits: bitarray,
    guesser: Guesser,
    gamma: GuesserRandomness,
    randomness: MinOrderRandomness,
    alpha: int,
    epoch: int,
    schedule: MtbeSchedule,
) -> frozenset[int]:
    """Rebuild D by replaying the dealer on D1, drawing the guess at tagged correct turns.

    Only the permutations of ``randomness`` are used; its reserved set is ignored.
    """
    check_unordered(schedule, alpha, epoch)
    n, k1, ell = schedule.n, schedule.k1, schedule.ell
    try:
        reader = BitReader(bits)
        if reader.read(1) == 0:
            cards = unrank_subset(reader.read(ceil_log2(math.comb(n, k1))), n, k1)
            reader.finish()
            return cards
        guesser.start(n, gamma)
        state = reader.read_bits(guesser.declared_bits)
        tagged = sorted(unrank_subset(reader.read(ceil_log2(math.comb(ell, alpha))), ell, alpha))
        correct = {p: reader.read(1) == 1 for p in tagged}
        residual = unrank_subset(reader.read(ceil_log2(math.comb(n, k1 - alpha))), n, k1 - alpha)
        reader.finish()
        if alpha == 0:
            return residual
        guesser.import_state(state)
        guessed = _replay_epochs(guesser, randomness, residual, correct, epoch, schedule)
    except (RankOutOfRange, ProtocolViolation) as exc:
        raise MalformedCodeword(f"Unordered codeword does not decode: {exc}") from exc
    if len(guessed) != alpha or guessed & residual:
        raise MalformedCodeword("Replay did not recover alpha fresh cards")
    return residual | guessed


def _replay_epochs(
    guesser: Guesser,
    randomness: MinOrderRandomness,
    residual: frozenset[int],
    correct: dict[int, bool],
    epoch: int,
    schedule: MtbeSchedule,
) -> frozenset[int]:
    n = schedule.n
    picker = MinOrderPicker(randomness.without_reserved(), n)
    deck = Deck(sorted(residual), n)
    guessed: set[int] = set()
    for j in range(1, epoch + 1):
        back: set[int] = set()
        start = schedule.start_of(j)
        for p in range(1, schedule.ell + 1):
            t = n - start + p
            g = guesser.guess(t)
            tagged = j == epoch and p in correct
            card = g if tagged and correct[p] else picker.pick(t, deck, back)
            guesser.observe(t, card)
            if card in deck:
                deck.remove(card)
            if g in deck and len(back) < schedule.u:
                back.add(g)
            if tagged:
                guessed.add(g)
                if len(guessed) == len(correct):
                    return frozenset(guessed)
    return frozenset(guessed)
