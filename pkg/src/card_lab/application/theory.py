"""Closed-form expected-score curves.

``log`` means log2 and ``ln`` the natural log; each curve keeps the base of its
source formula.
"""
from __future__ import annotations

import math
from collections.abc import Callable, Mapping

from card_lab.application.config import GridCell
from card_lab.domain.exceptions import ParamError, UnknownCurve
from card_lab.domain.services import harmonic
from card_lab.domain.value_objects import DealerKind, GuesserKind, TheoryCurve

Params = Mapping[str, float]


def _get(params: Params, name: str) -> float:
    try:
        return float(params[name])
    except KeyError:
        raise ParamError(f"Curve needs parameter {name!r}") from None


def _half_log(p: Params) -> float:
    return 0.5 * math.log2(_get(p, "n"))


def _general_delta(p: Params) -> float:
    delta = _get(p, "delta")
    return delta / ((1 + delta) * math.log(1 + delta)) * math.log(_get(p, "n"))


def _quarter_ln(p: Params) -> float:
    return 0.25 * math.log(_get(p, "n"))


def _subset(p: Params) -> float:
    return math.log(_get(p, "m"))


def _combined(p: Params) -> float:
    return 2 * math.log(_get(p, "m")) - math.log(math.log2(_get(p, "n"))) - math.log(2)


def _static_bound(p: Params) -> float:
    return 2 * math.sqrt(_get(p, "m") + 1) + 2


def _adaptive_bound(p: Params) -> float:
    log_n = math.log2(_get(p, "n"))
    return math.log(_get(p, "m")) + 2 * math.log(log_n) + math.log(16 * math.e)


def _universal_bound(p: Params) -> float:
    return math.log(_get(p, "m")) + 8 * math.log(math.log2(_get(p, "n")))


def _harmonic(p: Params) -> float:
    return harmonic(int(_get(p, "n")))


def _memoryless(p: Params) -> float:
    return 1.0


def _power_sum(p: Params) -> float:
    return harmonic(int(_get(p, "k")))


def _amplified(p: Params) -> float:
    return (1 - _get(p, "delta")) * math.log(_get(p, "n") / 2)


_CURVES: dict[TheoryCurve, Callable[[Params], float]] = {
    TheoryCurve.HALF_LOG: _half_log,
    TheoryCurve.GENERAL_DELTA: _general_delta,
    TheoryCurve.QUARTER_LN: _quarter_ln,
    TheoryCurve.SUBSET: _subset,
    TheoryCurve.COMBINED: _combined,
    TheoryCurve.STATIC_BOUND: _static_bound,
    TheoryCurve.ADAPTIVE_BOUND: _adaptive_bound,
    TheoryCurve.UNIVERSAL_BOUND: _universal_bound,
    TheoryCurve.HARMONIC: _harmonic,
    TheoryCurve.MEMORYLESS: _memoryless,
    TheoryCurve.POWER_SUM: _power_sum,
    TheoryCurve.AMPLIFIED: _amplified,
}


def theory_curve(name: str, params: Params) -> float:
    try:
        curve = TheoryCurve(name)
    except ValueError:
        raise UnknownCurve(f"Unknown theory curve: {name}") from None
    return _CURVES[curve](params)


_GUESSER_CURVES = {
    GuesserKind.MEMORYLESS: TheoryCurve.MEMORYLESS,
    GuesserKind.PERFECT: TheoryCurve.HARMONIC,
    GuesserKind.SUBSET: TheoryCurve.SUBSET,
    GuesserKind.POWER_SUM: TheoryCurve.POWER_SUM,
    GuesserKind.COMBINED: TheoryCurve.COMBINED,
    GuesserKind.RANDOMIZED: TheoryCurve.QUARTER_LN,
    GuesserKind.AMPLIFIED: TheoryCurve.AMPLIFIED,
}


def curve_for(cell: GridCell) -> tuple[TheoryCurve, float] | None:
    """The curve a sweep cell is compared against, or None when its parameters are missing.

    Adaptive dealers are compared against their score bound; everything else
    against the guesser's own expectation.
    """
    if cell.dealer in (DealerKind.MTBE, DealerKind.MTBE_MINORDER):
        curve = TheoryCurve.ADAPTIVE_BOUND
    elif cell.dealer is DealerKind.UNIVERSAL:
        curve = TheoryCurve.UNIVERSAL_BOUND
    elif cell.guesser is GuesserKind.FOLLOWING:
        exact_dyadic = cell.delta is None or cell.delta == 1
        curve = TheoryCurve.HALF_LOG if exact_dyadic else TheoryCurve.GENERAL_DELTA
    else:
        curve = _GUESSER_CURVES[cell.guesser]
    params: dict[str, float] = {"n": cell.n}
    for name in ("m", "k", "delta"):
        value = getattr(cell, name)
        if value is not None:
            params[name] = value
    try:
        return curve, theory_curve(curve.value, params)
    except ParamError:
        return None
