"""Epoch schedules of the adaptive dealers.

All formulas use base-2 logs of n and are floored to integers.
"""
from __future__ import annotations

import math

from card_lab.domain.entities import EpochParams, MtbeSchedule, UniversalSchedule
from card_lab.domain.exceptions import Infeasible, ParamError

EIGHT_E = 8 * math.e


def _log_n(n: int) -> float:
    if n < 4:
        raise ParamError(f"Schedules need n >= 4, got {n}")
    return math.log2(n)


def mtbe_params(n: int, m: int) -> MtbeSchedule:
    """Move-to-the-Back-Epoch schedule for memory budget m.

    k1 = n / (8e log n), ell = m log n, final cutoff = 2 m log n,
    d = (k1 - cutoff) / ell epochs with u = ell.
    """
    log_n = _log_n(n)
    if m < 0 or m > n / log_n**2:
        raise ParamError(f"MtBE schedule needs 0 <= m <= n / log2(n)^2, got m={m}")
    k1 = math.floor(n / (EIGHT_E * log_n))
    ell = math.floor(m * log_n)
    cutoff = math.floor(2 * m * log_n)
    if ell < 1:
        raise Infeasible(n, m, "epoch length m*log2(n) is below one turn")
    d = math.floor((k1 - cutoff) / ell)
    if d < 1:
        raise Infeasible(n, m, f"k1={k1} leaves no epoch above the final cutoff {cutoff}")
    return MtbeSchedule(n=n, m=m, k1=k1, ell=ell, d=d, final_cutoff=cutoff, u=ell)


def universal_params(n: int) -> UniversalSchedule:
    """Universal dealer schedule; at desk-scale n the epoch list is empty.

    Epoch i starts at k_i = n / (8e log^(1+i) n), lasts ell_i = k_i (1 - 1/log n)
    turns and moves at most u_i = 2 ell_i / log^2 n cards back. There are
    d = log_{log n}(n / (8e log^6 n)) of them, followed by a tail from log^4 n.
    """
    log_n = _log_n(n)
    tail = math.floor(log_n**4)
    arg = n / (EIGHT_E * log_n**6)
    d = math.floor(math.log(arg) / math.log(log_n)) if arg > 1 else 0
    starts = [math.floor(n / (EIGHT_E * log_n ** (1 + i))) for i in range(1, d + 2)]
    epochs: list[EpochParams] = []
    for i in range(d):
        k = starts[i]
        ell = min(math.floor(k * (1 - 1 / log_n)), k - starts[i + 1])
        u = math.floor(2 * ell / log_n**2)
        if ell < 1 or u > min(k - ell, ell) or k - ell < tail:
            continue
        epochs.append(EpochParams(k=k, ell=ell, u=u))
    return UniversalSchedule(n=n, k1=starts[0], epochs=tuple(epochs), tail_cutoff=tail, d=d)
