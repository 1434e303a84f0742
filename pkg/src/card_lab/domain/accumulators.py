from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from card_lab.domain.exceptions import ParamError, RecoveryInconsistent
from card_lab.domain.services import ceil_log2


@dataclass
class RangeAccumulator:
    """Count and offset-sum of the seen members of a w-element set, both modulo w.

    Members are addressed by offset 0..w-1. When exactly one member is unseen, its
    offset is (0 + 1 + ... + (w-1) - sum) mod w.
    """

    w: int
    count: int = 0  # seen members, modulo w
    sum_mod_w: int = 0

    def __post_init__(self) -> None:
        if self.w < 2:
            raise ParamError(f"Accumulator width must be at least 2, got {self.w}")

    @property
    def field_bits(self) -> int:
        return ceil_log2(self.w)

    @property
    def bits(self) -> int:
        return 2 * self.field_bits

    def observe(self, offset: int) -> None:
        self.count = (self.count + 1) % self.w
        self.sum_mod_w = (self.sum_mod_w + offset) % self.w

    def missing_offset(self) -> int | None:
        """Offset of the single unseen member, or None unless exactly one is unseen."""
        if self.count != self.w - 1:
            return None
        total = self.w * (self.w - 1) // 2
        return (total - self.sum_mod_w) % self.w


@dataclass
class XorBucket:
    """Remaining-member count modulo 2^bits and XOR of the remaining offsets."""

    modulus: int
    remaining: int = 0
    xor: int = 0

    def remove(self, offset: int) -> None:
        self.remaining = (self.remaining - 1) % self.modulus
        self.xor ^= offset

    def singleton(self) -> int | None:
        return self.xor if self.remaining == 1 else None


def smallest_prime_above(n: int) -> int:
    candidate = n + 1
    while True:
        if candidate >= 2 and all(candidate % p for p in range(2, int(candidate**0.5) + 1)):
            return candidate
        candidate += 1


@lru_cache(maxsize=64)
def _full_power_sums(n: int, k: int, q: int) -> tuple[int, ...]:
    xs = np.arange(1, n + 1, dtype=np.int64) % q
    acc = np.ones(n, dtype=np.int64)
    sums = []
    for _ in range(k):
        acc = acc * xs % q
        sums.append(int(acc.sum() % q))
    return tuple(sums)


@dataclass
class PowerSumState:
    """S_p = sum of x^p over undrawn cards x, p = 1..k, modulo the prime q."""

    n: int
    k: int
    q: int
    sums: list[int] = field(default_factory=list)
    remaining: int = 0

    @classmethod
    def full(cls, n: int, k: int) -> PowerSumState:
        if k < 1:
            raise ParamError(f"k must be at least 1, got {k}")
        q = smallest_prime_above(n)
        return cls(n=n, k=k, q=q, sums=list(_full_power_sums(n, k, q)), remaining=n)

    @property
    def sum_bits(self) -> int:
        return ceil_log2(self.q)

    @property
    def counter_bits(self) -> int:
        """Room for 0..n cards left."""
        return ceil_log2(self.n + 1)

    def remove(self, card: int) -> None:
        power = 1
        for p in range(self.k):
            power = power * card % self.q
            self.sums[p] = (self.sums[p] - power) % self.q
        self.remaining -= 1


def recover_missing(state: PowerSumState, k: int) -> frozenset[int]:
    """The k undrawn cards, from the first k power sums.

    Newton's identities give the elementary symmetric polynomials; the missing
    cards are the roots of prod (x - c), found by scanning 1..n.
    """
    if not 1 <= k <= state.k:
        raise ParamError(f"Can recover between 1 and {state.k} cards, asked for {k}")
    q = state.q
    p = state.sums
    e = [1] + [0] * k
    for j in range(1, k + 1):
        acc = 0
        for i in range(1, j + 1):
            term = e[j - i] * p[i - 1]
            acc += term if i % 2 == 1 else -term
        e[j] = acc % q * pow(j, q - 2, q) % q
    # coefficients of x^k, x^(k-1), ..., x^0
    coeffs = [e[j] if j % 2 == 0 else (-e[j]) % q for j in range(k + 1)]
    xs = np.arange(1, state.n + 1, dtype=np.int64)
    values = np.zeros(state.n, dtype=np.int64)
    for c in coeffs:
        values = (values * xs + c) % q
    roots = frozenset(int(x) for x in xs[values == 0])
    if len(roots) != k:
        raise RecoveryInconsistent(f"Expected {k} missing cards, found {len(roots)}")
    return roots
