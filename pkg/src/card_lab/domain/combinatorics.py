"""Subset and ordered-tuple ranks over the cards 1..n.

Subsets are ranked in lexicographic order of their sorted elements, computed
through the colex combinatorial number system on the mirrored set. Ordered
tuples are ranked in a falling-factorial mixed radix, lexicographic as well.
"""
from __future__ import annotations

import bisect
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

from card_lab.domain.exceptions import RankOutOfRange


@dataclass(frozen=True)
class SubsetRank:
    n: int
    k: int
    rank: int  # in [0, C(n, k))


@dataclass(frozen=True)
class OrderedRank:
    n: int
    k: int
    rank: int  # in [0, n * (n-1) * ... * (n-k+1))


def _colex_rank(zero_based: Iterable[int]) -> int:
    return sum(math.comb(c, j + 1) for j, c in enumerate(sorted(zero_based)))


def _colex_unrank(r: int, n: int, k: int) -> list[int]:
    """k-subset of {0..n-1} with colex rank r, by binary search on each element."""
    out = [0] * k
    while k > 0:
        lower = k - 1
        while lower < n:
            mid = (lower + n + 1) // 2
            if r < math.comb(mid, k):
                n = mid - 1
            else:
                lower = mid
        r -= math.comb(n, k)
        k -= 1
        out[k] = n
    return out


def rank_subset(subset: Iterable[int], n: int) -> SubsetRank:
    items = list(subset)
    cards = sorted(set(items))
    if len(cards) != len(items):
        raise RankOutOfRange("Subset contains repeated cards")
    if cards and (cards[0] < 1 or cards[-1] > n):
        raise RankOutOfRange(f"Subset elements must lie in 1..{n}")
    k = len(cards)
    mirrored = [n - c for c in cards]  # card c is element c-1, mirrored to n-1-(c-1)
    rank = math.comb(n, k) - 1 - _colex_rank(mirrored)
    return SubsetRank(n=n, k=k, rank=rank)


def unrank_subset(r: int, n: int, k: int) -> frozenset[int]:
    total = math.comb(n, k)
    if not 0 <= r < total:
        raise RankOutOfRange(f"Rank {r} outside [0, C({n},{k}) = {total})")
    mirrored = _colex_unrank(total - 1 - r, n, k)
    return frozenset(n - c for c in mirrored)


def falling(n: int, k: int) -> int:
    """n * (n-1) * ... * (n-k+1)."""
    return math.perm(n, k)


def rank_ordered(cards: Sequence[int], n: int) -> OrderedRank:
    k = len(cards)
    if len(set(cards)) != k:
        raise RankOutOfRange("Ordered tuple contains repeated cards")
    used: list[int] = []
    rank = 0
    for i, card in enumerate(cards):
        if not 1 <= card <= n:
            raise RankOutOfRange(f"Card {card} outside 1..{n}")
        digit = (card - 1) - bisect.bisect_left(used, card)  # unused cards below this one
        rank += digit * falling(n - i - 1, k - i - 1)
        bisect.insort(used, card)
    return OrderedRank(n=n, k=k, rank=rank)


def unrank_ordered(r: int, n: int, k: int) -> tuple[int, ...]:
    total = falling(n, k)
    if not 0 <= r < total:
        raise RankOutOfRange(f"Rank {r} outside [0, {n}P{k} = {total})")
    used: list[int] = []
    out: list[int] = []
    for i in range(k):
        radix = falling(n - i - 1, k - i - 1)
        digit, r = divmod(r, radix)
        card = digit + 1
        for u in used:  # used is sorted; skip over taken cards
            if u <= card:
                card += 1
        out.append(card)
        bisect.insort(used, card)
    return tuple(out)
