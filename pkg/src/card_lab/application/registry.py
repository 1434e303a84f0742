"""Builds guessers and dealers from their specs."""
from __future__ import annotations

import dataclasses
import logging
import math
from collections.abc import Callable
from typing import Any

from card_lab.application.config import DealerSpec, GuesserSpec
from card_lab.domain.dealers import (
    Dealer,
    adversarial_arrangement_for,
    make_minorder_dealer,
    make_mtbe_dealer,
    make_random_shuffle,
    make_static,
    make_universal_dealer,
    validate_arrangement,
)
from card_lab.domain.exceptions import ParamError
from card_lab.domain.guessers import (
    DomainRestrictedGuesser,
    Guesser,
    make_amplified_subsets,
    make_combined_guesser,
    make_following_subsets,
    make_memoryless,
    make_perfect_memory,
    make_power_sum_guesser,
    make_randomized_subsets,
    make_subset_guesser,
)
from card_lab.domain.randomness import SeededStream, StreamId, derive_key, derive_streams
from card_lab.domain.schedules import mtbe_params, universal_params
from card_lab.domain.services import is_power_of_two
from card_lab.domain.value_objects import ArrangementPattern, DealerKind, GuesserKind

logger = logging.getLogger(__name__)

MIN_DOMAIN = 4

DealerFactory = Callable[[], Dealer]


def _require(value: int | None, name: str, kind: GuesserKind) -> int:
    if value is None:
        raise ParamError(f"{kind.value} guesser needs {name}")
    return value


def _build_inner(spec: GuesserSpec) -> Guesser:
    kind = spec.kind
    if kind is GuesserKind.MEMORYLESS:
        return make_memoryless(spec.card)
    if kind is GuesserKind.PERFECT:
        return make_perfect_memory()
    if kind is GuesserKind.SUBSET:
        return make_subset_guesser(_require(spec.m, "m", kind))
    if kind is GuesserKind.POWER_SUM:
        return make_power_sum_guesser(_require(spec.k, "k", kind))
    if kind is GuesserKind.COMBINED:
        return make_combined_guesser(_require(spec.m, "m", kind))
    if kind is GuesserKind.FOLLOWING:
        return make_following_subsets(spec.delta if spec.delta is not None else 1.0)
    if kind is GuesserKind.RANDOMIZED:
        return make_randomized_subsets()
    if spec.delta is None:
        raise ParamError("amplified guesser needs delta")
    return make_amplified_subsets(spec.delta, spec.k)


def build_guesser(spec: GuesserSpec) -> Guesser:
    """A fresh guesser handle; wrapped to cards 1..domain when the spec restricts it."""
    inner = _build_inner(spec)
    if spec.domain is not None:
        return DomainRestrictedGuesser(inner, spec.domain)
    return inner


def shrunken_domain(m: int) -> int:
    """Nominal reduced domain 2^floor(sqrt(m))."""
    return 1 << math.isqrt(m)


def declared_bits(spec: GuesserSpec, n: int) -> int:
    """Declared state bits of the guesser on n cards."""
    guesser = build_guesser(spec)
    guesser.start(n, derive_streams(0, 0).guesser)
    return guesser.declared_bits


def shrink_domain(spec: GuesserSpec, m: int, n: int) -> GuesserSpec:
    """Restrict a guesser to the largest power-of-two domain whose layout fits in m bits.

    Starts from 2^floor(sqrt(m)) (capped at n) and halves while the declared
    layout, turn counter included, exceeds m.
    """
    domain = min(shrunken_domain(m), n)
    while True:
        candidate = spec.model_copy(update={"domain": domain})
        bits = declared_bits(candidate, n)
        if bits <= m:
            logger.debug("Shrunk %s to domain %d (%d bits)", spec.kind.value, domain, bits)
            return candidate
        if domain <= MIN_DOMAIN:
            raise ParamError(f"{spec.kind.value} guesser needs {bits} bits even on {domain} cards")
        domain //= 2


def bit_reversal(n: int) -> tuple[int, ...]:
    if not is_power_of_two(n):
        raise ParamError(f"Bit-reversal arrangement needs n a power of two, got {n}")
    width = n.bit_length() - 1
    return tuple(int(format(i, f"0{width}b")[::-1] or "0", 2) + 1 for i in range(n))


def arrangement_from_pattern(
    pattern: ArrangementPattern, n: int, master_seed: int
) -> tuple[int, ...]:
    """Named static arrangement. ``random`` is shared by every trial of one seed."""
    if pattern is ArrangementPattern.IDENTITY:
        return tuple(range(1, n + 1))
    if pattern is ArrangementPattern.REVERSE:
        return tuple(range(n, 0, -1))
    if pattern is ArrangementPattern.BIT_REVERSAL:
        return bit_reversal(n)
    stream = SeededStream(derive_key(master_seed, 0, StreamId.ARRANGEMENT))
    return tuple((stream.generator().permutation(n) + 1).tolist())


def _budget(spec: DealerSpec, m: int) -> int:
    budget = spec.m if spec.m is not None else m
    if budget < 1:
        raise ParamError(f"{spec.kind.value} dealer needs a memory budget m >= 1")
    return budget


def dealer_factory(
    spec: DealerSpec,
    guesser: GuesserSpec,
    n: int,
    m: int = 0,
    master_seed: int = 0,
) -> DealerFactory:
    """Returns a callable producing a fresh dealer per trial.

    Schedules and arrangements are computed here, once, so an infeasible
    configuration fails before any game is played.
    """
    kind = spec.kind
    if kind is DealerKind.SHUFFLE:
        return make_random_shuffle
    if kind is DealerKind.STATIC:
        if spec.arrangement is not None:
            arrangement = validate_arrangement(spec.arrangement, n)
        else:
            pattern = spec.pattern or ArrangementPattern.RANDOM
            arrangement = arrangement_from_pattern(pattern, n, master_seed)
        return lambda: make_static(arrangement)
    if kind is DealerKind.STATIC_ADVERSARIAL:
        adversarial = adversarial_arrangement_for(build_guesser(guesser), n)
        return lambda: make_static(adversarial)
    if kind is DealerKind.MTBE:
        schedule = mtbe_params(n, _budget(spec, m))
        return lambda: make_mtbe_dealer(schedule)
    if kind is DealerKind.MTBE_MINORDER:
        schedule = mtbe_params(n, _budget(spec, m))
        return lambda: make_minorder_dealer(schedule)
    universal = universal_params(n)
    return lambda: make_universal_dealer(universal)


def schedule_summary(dealer: DealerKind, n: int, m: int | None) -> dict[str, Any]:
    """Epoch layout of an adaptive dealer as plain JSON-ready data."""
    if dealer in (DealerKind.MTBE, DealerKind.MTBE_MINORDER):
        if m is None:
            raise ParamError(f"{dealer.value} schedule needs m")
        schedule = mtbe_params(n, m)
        return {
            "dealer": dealer.value,
            **dataclasses.asdict(schedule),
            "epochs": [dataclasses.asdict(e) for e in schedule.epochs],
        }
    if dealer is DealerKind.UNIVERSAL:
        universal = dataclasses.asdict(universal_params(n))
        return {"dealer": dealer.value, **universal, "epochs": list(universal["epochs"])}
    raise ParamError(f"{dealer.value} dealer has no epoch schedule")
