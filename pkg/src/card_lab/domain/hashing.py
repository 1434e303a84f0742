"""Arithmetic over GF(2^ell) and the hash families built on it.

Field elements are the integers 0..2^ell-1 read as polynomials over GF(2).
Cards and hash values are identified with elements by subtracting one, so
card x maps to element x-1 and element e maps back to value e+1 in 1..2^ell.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import numpy.typing as npt

from card_lab.domain.exceptions import DivisionByZero, ParamError

IntArray = npt.NDArray[np.int64]

# Reduction polynomials per degree, bit i = coefficient of x^i. All are primitive,
# so x generates the multiplicative group and log/exp tables apply.
REDUCTION_POLYNOMIALS: dict[int, int] = {
    2: 0x7,  # x^2 + x + 1
    3: 0xB,  # x^3 + x + 1
    4: 0x13,  # x^4 + x + 1
    5: 0x25,  # x^5 + x^2 + 1
    6: 0x43,  # x^6 + x + 1
    7: 0x83,  # x^7 + x + 1
    8: 0x11D,  # x^8 + x^4 + x^3 + x^2 + 1
    9: 0x211,  # x^9 + x^4 + 1
    10: 0x409,  # x^10 + x^3 + 1
    11: 0x805,  # x^11 + x^2 + 1
    12: 0x1053,  # x^12 + x^6 + x^4 + x + 1
    13: 0x201B,  # x^13 + x^4 + x^3 + x + 1
    14: 0x4443,  # x^14 + x^10 + x^6 + x + 1
    15: 0x8003,  # x^15 + x + 1
    16: 0x1100B,  # x^16 + x^12 + x^3 + x + 1
    17: 0x20009,  # x^17 + x^3 + 1
    18: 0x40081,  # x^18 + x^7 + 1
    19: 0x80027,  # x^19 + x^5 + x^2 + x + 1
    20: 0x100009,  # x^20 + x^3 + 1
    21: 0x200005,  # x^21 + x^2 + 1
    22: 0x400003,  # x^22 + x + 1
    23: 0x800021,  # x^23 + x^5 + 1
    24: 0x1000087,  # x^24 + x^7 + x^2 + x + 1
    25: 0x2000009,  # x^25 + x^3 + 1
    26: 0x4000047,  # x^26 + x^6 + x^2 + x + 1
    27: 0x8000027,  # x^27 + x^5 + x^2 + x + 1
    28: 0x10000009,  # x^28 + x^3 + 1
    29: 0x20000005,  # x^29 + x^2 + 1
    30: 0x40800007,  # x^30 + x^23 + x^2 + x + 1
}

MAX_TABLE_DEGREE = 20  # log/exp tables up to 2^20 entries


def poly_mod(a: int, b: int) -> int:
    """Remainder of a divided by b as polynomials over GF(2)."""
    db = b.bit_length()
    while a.bit_length() >= db:
        a ^= b << (a.bit_length() - db)
    return a


def is_irreducible(poly: int) -> bool:
    """Trial division by every polynomial of degree 1..deg/2."""
    degree = poly.bit_length() - 1
    if degree < 1:
        return False
    if degree == 1:
        return True
    if poly & 1 == 0:
        return False  # divisible by x
    # x itself was ruled out above, so only divisors with a constant term remain
    for divisor in range(3, 1 << (degree // 2 + 1), 2):
        if poly_mod(poly, divisor) == 0:
            return False
    return True


@dataclass(frozen=True)
class FieldSpec:
    ell: int
    reduction_polynomial: int

    @property
    def order(self) -> int:
        return 1 << self.ell


@lru_cache(maxsize=None)
def field_spec(ell: int) -> FieldSpec:
    """The field GF(2^ell) with its published reduction polynomial, checked irreducible."""
    poly = REDUCTION_POLYNOMIALS.get(ell)
    if poly is None:
        raise ParamError(f"No reduction polynomial for ell={ell}; supported 2..30")
    if poly.bit_length() - 1 != ell or not is_irreducible(poly):
        raise ParamError(f"Reduction polynomial {poly:#x} is not irreducible of degree {ell}")
    return FieldSpec(ell=ell, reduction_polynomial=poly)


def _build_tables(spec: FieldSpec) -> tuple[IntArray, IntArray] | None:
    """exp/log tables with x as generator; None when x does not generate the group."""
    q = spec.order
    exp = np.zeros(2 * (q - 1), dtype=np.int64)
    log = np.full(q, -1, dtype=np.int64)
    x = 1
    for i in range(q - 1):
        if log[x] != -1:
            return None
        exp[i] = x
        log[x] = i
        x <<= 1
        if x & q:
            x ^= spec.reduction_polynomial
    exp[q - 1 :] = exp[: q - 1]
    return exp, log


class FieldOps:
    """add / mul / inverse on one field, scalar and vectorised."""

    def __init__(self, spec: FieldSpec) -> None:
        self.spec = spec
        self.order = spec.order
        tables = _build_tables(spec) if spec.ell <= MAX_TABLE_DEGREE else None
        self._exp: IntArray | None = None
        self._log: IntArray | None = None
        if tables is not None:
            self._exp, self._log = tables

    def add(self, a: int, b: int) -> int:
        return a ^ b

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        if self._exp is not None and self._log is not None:
            return int(self._exp[self._log[a] + self._log[b]])
        return self._clmul(a, b)

    def _clmul(self, a: int, b: int) -> int:
        """Carry-less product reduced on the fly."""
        result = 0
        top = self.order
        poly = self.spec.reduction_polynomial
        while b:
            if b & 1:
                result ^= a
            b >>= 1
            a <<= 1
            if a & top:
                a ^= poly
        return result

    def inverse(self, a: int) -> int:
        if a == 0:
            raise DivisionByZero("Zero has no multiplicative inverse")
        if self._exp is not None and self._log is not None:
            return int(self._exp[(self.order - 1 - self._log[a]) % (self.order - 1)])
        # a^(q-2) by square-and-multiply
        result, base, e = 1, a, self.order - 2
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result

    def mul_array(self, a: IntArray, b: IntArray | int) -> IntArray:
        """Elementwise product of arrays (or array times scalar)."""
        b_arr = np.broadcast_to(np.asarray(b, dtype=np.int64), a.shape)
        if self._exp is not None and self._log is not None:
            nonzero = (a != 0) & (b_arr != 0)
            out = np.zeros(a.shape, dtype=np.int64)
            out[nonzero] = self._exp[self._log[a[nonzero]] + self._log[b_arr[nonzero]]]
            return out
        flat = [self._clmul(int(x), int(y)) for x, y in zip(a.ravel(), b_arr.ravel())]
        return np.asarray(flat, dtype=np.int64).reshape(a.shape)


@lru_cache(maxsize=None)
def field_ops(spec: FieldSpec) -> FieldOps:
    return FieldOps(spec)


def elements(spec: FieldSpec) -> IntArray:
    return np.arange(spec.order, dtype=np.int64)


# ---------------------------------------------------------------------------
# Pairwise independent permutations h(x) = a*x + b, a != 0
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PairwisePerm:
    spec: FieldSpec
    a: int
    b: int

    def __post_init__(self) -> None:
        if not 0 < self.a < self.spec.order or not 0 <= self.b < self.spec.order:
            raise ParamError("Pairwise permutation needs a != 0 and a, b in the field")


def pairwise_seed_bits(ell: int) -> int:
    """Long-lived bits charged for one pairwise permutation (a and b)."""
    return 2 * ell


def sample_pairwise(spec: FieldSpec, rng: np.random.Generator) -> PairwisePerm:
    a = 1 + int(rng.integers(spec.order - 1))
    b = int(rng.integers(spec.order))
    return PairwisePerm(spec, a, b)


def eval_pairwise(p: PairwisePerm, x: int) -> int:
    ops = field_ops(p.spec)
    return ops.add(ops.mul(p.a, x), p.b)


def invert_pairwise(p: PairwisePerm, y: int) -> int:
    """The unique x with h(x) = y."""
    ops = field_ops(p.spec)
    return ops.mul(ops.inverse(p.a), ops.add(y, p.b))


def eval_pairwise_all(p: PairwisePerm) -> IntArray:
    """h evaluated at every field element, indexed by element."""
    ops = field_ops(p.spec)
    return ops.mul_array(elements(p.spec), p.a) ^ p.b


# ---------------------------------------------------------------------------
# k-wise independent polynomials of degree <= k-1
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KWisePoly:
    spec: FieldSpec
    coeffs: tuple[int, ...]  # highest degree first

    @property
    def k(self) -> int:
        return len(self.coeffs)


def kwise_seed_bits(ell: int, k: int) -> int:
    return k * ell


def sample_kwise(spec: FieldSpec, k: int, rng: np.random.Generator) -> KWisePoly:
    if k < 1:
        raise ParamError(f"k must be at least 1, got {k}")
    coeffs = tuple(int(c) for c in rng.integers(spec.order, size=k))
    return KWisePoly(spec, coeffs)


def eval_poly(f: KWisePoly, x: int) -> int:
    """Horner's rule."""
    ops = field_ops(f.spec)
    acc = 0
    for c in f.coeffs:
        acc = ops.add(ops.mul(acc, x), c)
    return acc


def eval_poly_at(f: KWisePoly, xs: IntArray) -> IntArray:
    ops = field_ops(f.spec)
    acc = np.zeros(xs.shape, dtype=np.int64)
    for c in f.coeffs:
        acc = ops.mul_array(acc, xs) ^ c
    return acc


def eval_poly_all(f: KWisePoly) -> IntArray:
    return eval_poly_at(f, elements(f.spec))


# ---------------------------------------------------------------------------
# Dyadic buckets over hash values 1..2^ell
# ---------------------------------------------------------------------------


def bucket_of(y: int, ell: int) -> int:
    """Bucket j with 2^(j-1) < y <= 2^j; values 1 and 2 both land in bucket 1."""
    if not 1 <= y <= 1 << ell:
        raise ParamError(f"Hash value {y} outside 1..{1 << ell}")
    return max(1, (y - 1).bit_length())


def bucket_of_array(ys: IntArray, ell: int) -> IntArray:
    upper = np.array([1 << j for j in range(1, ell + 1)], dtype=np.int64)
    return np.searchsorted(upper, ys, side="left").astype(np.int64) + 1


def bucket_base(j: int) -> int:
    """Bucket j holds the values bucket_base(j)+1 .. bucket_base(j)+bucket_size(j)."""
    return 0 if j == 1 else 1 << (j - 1)


def bucket_size(j: int) -> int:
    return 2 if j == 1 else 1 << (j - 1)
