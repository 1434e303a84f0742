"""Guesser strategies.

A guesser is started once per game with the deck size and its randomness, then
asked for a guess and shown the drawn card every turn. Its memory is the list
of fixed-width fields returned by :meth:`Guesser.layout`; everything else it
keeps (hash tables, candidate lists) is derived from long-lived randomness or
from that state, so :meth:`Guesser.import_state` fully restores a game in progress.
"""
from __future__ import annotations

import math
from abc import ABC, abstractmethod
from collections.abc import Sequence
from typing import ClassVar

import numpy as np
from bitarray import bitarray

from card_lab.domain.accumulators import PowerSumState, RangeAccumulator, XorBucket, recover_missing
from card_lab.domain.bits import bits_to_int, pack_fields, unpack_fields
from card_lab.domain.exceptions import MalformedCodeword, ParamError
from card_lab.domain.hashing import (
    PairwisePerm,
    bucket_base,
    bucket_of_array,
    bucket_size,
    eval_pairwise_all,
    eval_poly_all,
    field_spec,
    invert_pairwise,
    kwise_seed_bits,
    pairwise_seed_bits,
    sample_kwise,
    sample_pairwise,
)
from card_lab.domain.randomness import GuesserRandomness, SeededStream
from card_lab.domain.services import ceil_log2, is_power_of_two
from card_lab.domain.value_objects import GuesserKind

FALLBACK_CARD = 1  # the "don't care" guess


class Guesser(ABC):
    """A memory-bounded guessing strategy for one game."""

    kind: ClassVar[GuesserKind]
    deterministic: ClassVar[bool] = False  # uses no random bits at all
    uses_turn_index: ClassVar[bool] = False  # guesses depend on how many cards are left

    def __init__(self) -> None:
        self._n = 0
        self._on_the_fly = SeededStream(0)

    @property
    def n(self) -> int:
        return self._n

    def start(self, n: int, randomness: GuesserRandomness) -> None:
        if n < 1:
            raise ParamError(f"Deck size must be at least 1, got {n}")
        self._n = n
        self._on_the_fly = randomness.on_the_fly
        self._setup(n, randomness.long_lived)

    @abstractmethod
    def _setup(self, n: int, long_lived: SeededStream) -> None: ...

    @abstractmethod
    def guess(self, t: int) -> int: ...

    @abstractmethod
    def observe(self, t: int, card: int) -> None: ...

    @abstractmethod
    def layout(self) -> tuple[int, ...]:
        """Bit width of every state field."""

    @abstractmethod
    def state_values(self) -> list[int]: ...

    @abstractmethod
    def load_state_values(self, values: Sequence[int]) -> None: ...

    @property
    def declared_bits(self) -> int:
        return sum(self.layout())

    @property
    def long_lived_bits(self) -> int:
        return 0

    def export_state(self) -> bitarray:
        return pack_fields(self.state_values(), self.layout())

    def import_state(self, bits: bitarray) -> None:
        if len(bits) != self.declared_bits:
            raise MalformedCodeword(
                f"State has {len(bits)} bits, layout declares {self.declared_bits}"
            )
        self.load_state_values(unpack_fields(bits, self.layout()))

    def _pick(self, t: int, candidates: Sequence[int]) -> int:
        """Uniform choice among canonically ordered candidates, read once per turn."""
        return int(candidates[self._on_the_fly.below(t, len(candidates))])


def _require_power_of_two(n: int) -> int:
    if not is_power_of_two(n) or n < 4:
        raise ParamError(f"Subset-based guessers need n a power of two >= 4, got {n}")
    return n.bit_length() - 1


def _mask_to_int(mask: np.ndarray) -> int:
    if mask.size == 0:
        return 0
    return bits_to_int(bitarray(mask.tolist(), endian="big"))


def _int_to_mask(value: int, size: int) -> np.ndarray:
    bits = [(value >> (size - 1 - i)) & 1 for i in range(size)]
    return np.array(bits, dtype=bool)


class MemorylessGuesser(Guesser):
    kind = GuesserKind.MEMORYLESS
    deterministic = True

    def __init__(self, card: int) -> None:
        super().__init__()
        self.card = card

    def _setup(self, n: int, long_lived: SeededStream) -> None:
        if not 1 <= self.card <= n:
            raise ParamError(f"Card {self.card} outside 1..{n}")

    def guess(self, t: int) -> int:
        return self.card

    def observe(self, t: int, card: int) -> None:
        pass

    def layout(self) -> tuple[int, ...]:
        return ()

    def state_values(self) -> list[int]:
        return []

    def load_state_values(self, values: Sequence[int]) -> None:
        pass


class PerfectMemoryGuesser(Guesser):
    """Remembers every drawn card (n bits) and guesses a random undrawn one."""

    kind = GuesserKind.PERFECT

    def _setup(self, n: int, long_lived: SeededStream) -> None:
        self._seen = np.zeros(n, dtype=bool)

    def guess(self, t: int) -> int:
        unseen = np.flatnonzero(~self._seen)
        if unseen.size == 0:
            return FALLBACK_CARD
        return self._pick(t, unseen) + 1

    def observe(self, t: int, card: int) -> None:
        self._seen[card - 1] = True

    def layout(self) -> tuple[int, ...]:
        return (self.n,)

    def state_values(self) -> list[int]:
        return [_mask_to_int(self._seen)]

    def load_state_values(self, values: Sequence[int]) -> None:
        self._seen = _int_to_mask(values[0], self.n)


class SubsetGuesser(Guesser):
    """Tracks a random m-card subset A and guesses its unseen members."""

    kind = GuesserKind.SUBSET

    def __init__(self, m: int) -> None:
        super().__init__()
        self.m = m

    def _setup(self, n: int, long_lived: SeededStream) -> None:
        if not 1 <= self.m <= n:
            raise ParamError(f"Subset size must lie in 1..{n}, got {self.m}")
        rng = long_lived.generator()
        self._members = np.sort(rng.choice(n, size=self.m, replace=False)) + 1
        self._position = {int(card): i for i, card in enumerate(self._members)}
        self._seen = np.zeros(self.m, dtype=bool)

    @property
    def long_lived_bits(self) -> int:
        return ceil_log2(math.comb(self.n, self.m))

    @property
    def exhausted(self) -> bool:
        return bool(self._seen.all())

    def guess(self, t: int) -> int:
        unseen = self._members[~self._seen]
        if unseen.size == 0:
            return FALLBACK_CARD
        return self._pick(t, unseen)

    def observe(self, t: int, card: int) -> None:
        pos = self._position.get(card)
        if pos is not None:
            self._seen[pos] = True

    def layout(self) -> tuple[int, ...]:
        return (self.m,)

    def state_values(self) -> list[int]:
        return [_mask_to_int(self._seen)]

    def load_state_values(self, values: Sequence[int]) -> None:
        self._seen = _int_to_mask(values[0], self.m)


class PowerSumGuesser(Guesser):
    """Keeps k power sums of the undrawn cards; in the last k turns it knows them all."""

    kind = GuesserKind.POWER_SUM

    def __init__(self, k: int) -> None:
        super().__init__()
        if k < 1:
            raise ParamError(f"k must be at least 1, got {k}")
        self.k = k

    def _setup(self, n: int, long_lived: SeededStream) -> None:
        self.state = PowerSumState.full(n, self.k)

    @property
    def remaining(self) -> int:
        return self.state.remaining

    @property
    def active(self) -> bool:
        return 1 <= self.state.remaining <= self.k

    def guess(self, t: int) -> int:
        if not self.active:
            return FALLBACK_CARD
        missing = sorted(recover_missing(self.state, self.state.remaining))
        return self._pick(t, missing)

    def observe(self, t: int, card: int) -> None:
        self.state.remove(card)

    def layout(self) -> tuple[int, ...]:
        return (self.state.sum_bits,) * self.k + (self.state.counter_bits,)

    def state_values(self) -> list[int]:
        return [*self.state.sums, self.state.remaining]

    def load_state_values(self, values: Sequence[int]) -> None:
        self.state.sums = list(values[: self.k])
        self.state.remaining = values[self.k]


class CombinedGuesser(Guesser):
    """A subset guesser for the early game, power sums for the last k cards."""

    kind = GuesserKind.COMBINED

    def __init__(self, m: int) -> None:
        super().__init__()
        if m < 2:
            raise ParamError(f"Combined guesser needs m >= 2, got {m}")
        self.m = m

    def start(self, n: int, randomness: GuesserRandomness) -> None:
        if self.m > math.isqrt(n):
            raise ParamError(f"Combined guesser needs m <= sqrt(n), got m={self.m}, n={n}")
        ell = max(1, ceil_log2(n))
        self.subset = SubsetGuesser(max(1, self.m // 2))
        self.power = PowerSumGuesser(max(1, self.m // (2 * ell)))
        super().start(n, randomness)
        self.subset.start(n, randomness)
        self.power.start(n, randomness)

    def _setup(self, n: int, long_lived: SeededStream) -> None:
        pass

    @property
    def long_lived_bits(self) -> int:
        return self.subset.long_lived_bits

    def guess(self, t: int) -> int:
        if self.power.active:
            return self.power.guess(t)
        return self.subset.guess(t)

    def observe(self, t: int, card: int) -> None:
        self.subset.observe(t, card)
        self.power.observe(t, card)

    def layout(self) -> tuple[int, ...]:
        return self.subset.layout() + self.power.layout()

    def state_values(self) -> list[int]:
        return self.subset.state_values() + self.power.state_values()

    def load_state_values(self, values: Sequence[int]) -> None:
        split = len(self.subset.layout())
        self.subset.load_state_values(values[:split])
        self.power.load_state_values(values[split:])


def following_widths(n: int, delta: float) -> list[int]:
    """Nested range sizes 2, 2(1+delta), 2(1+delta)^2, ... capped at n, always ending at n."""
    widths: list[int] = []
    i = 0
    while True:
        w = min(n, math.ceil(2 * (1 + delta) ** i - 1e-9))
        if not widths or w > widths[-1]:
            widths.append(w)
        if w >= n:
            return widths
        i += 1


class FollowingSubsetsGuesser(Guesser):
    """Follows the nested ranges [1..w]; guesses the card missing from the smallest
    range that has exactly one card left. Deterministic."""

    kind = GuesserKind.FOLLOWING
    deterministic = True

    def __init__(self, delta: float = 1.0) -> None:
        super().__init__()
        if not 0 < delta <= 1:
            raise ParamError(f"delta must lie in (0, 1], got {delta}")
        self.delta = delta

    def _setup(self, n: int, long_lived: SeededStream) -> None:
        _require_power_of_two(n)
        self.ranges = [RangeAccumulator(w) for w in following_widths(n, self.delta)]

    def guess(self, t: int) -> int:
        for acc in self.ranges:
            offset = acc.missing_offset()
            if offset is not None:
                return offset + 1
        return FALLBACK_CARD

    def observe(self, t: int, card: int) -> None:
        for acc in reversed(self.ranges):
            if card > acc.w:
                break
            acc.observe(card - 1)

    def layout(self) -> tuple[int, ...]:
        return tuple(b for acc in self.ranges for b in (acc.field_bits, acc.field_bits))

    def state_values(self) -> list[int]:
        return [v for acc in self.ranges for v in (acc.count, acc.sum_mod_w)]

    def load_state_values(self, values: Sequence[int]) -> None:
        for i, acc in enumerate(self.ranges):
            acc.count, acc.sum_mod_w = values[2 * i], values[2 * i + 1]


def probe_level(n: int, cards_left: int) -> int:
    """floor(log2(n / (2t))) for t <= n/2 cards left."""
    return (n // (2 * cards_left)).bit_length() - 1


def probe_bucket(n: int, cards_left: int, ell: int) -> int:
    """The bucket whose preimage holds 2^level values (bucket 1 for level 0)."""
    return min(ell, probe_level(n, cards_left) + 1)


class RandomizedSubsetsGuesser(Guesser):
    """Random dyadic buckets via one pairwise permutation.

    First half: subset-guess from a small random set A. Second half, with t cards
    left: guess the missing card of the probed bucket when exactly one is unseen.
    """

    kind = GuesserKind.RANDOMIZED
    uses_turn_index = True

    def _setup(self, n: int, long_lived: SeededStream) -> None:
        self.ell = _require_power_of_two(n)
        rng = long_lived.generator()
        self.perm: PairwisePerm = sample_pairwise(field_spec(self.ell), rng)
        values = eval_pairwise_all(self.perm) + 1  # indexed by card - 1
        buckets = bucket_of_array(values, self.ell)
        # index 0 is unused: buckets are numbered from 1
        bases = np.array([0] + [bucket_base(j) for j in range(1, self.ell + 1)], dtype=np.int64)
        self._bucket_of_card: list[int] = buckets.tolist()
        self._offset_of_card: list[int] = (values - bases[buckets] - 1).tolist()
        self.buckets = [RangeAccumulator(bucket_size(j)) for j in range(1, self.ell + 1)]
        self.first_half = SubsetGuesser(min(n, self.ell * self.ell))
        self.first_half.start(n, GuesserRandomness(long_lived.child(1), self._on_the_fly))

    @property
    def bucket_bits(self) -> int:
        return sum(acc.bits for acc in self.buckets)

    @property
    def long_lived_bits(self) -> int:
        return pairwise_seed_bits(self.ell) + self.first_half.long_lived_bits

    def guess(self, t: int) -> int:
        cards_left = self.n - t + 1
        if 2 * cards_left > self.n:
            return self.first_half.guess(t)
        j = probe_bucket(self.n, cards_left, self.ell)
        offset = self.buckets[j - 1].missing_offset()
        if offset is None:
            return FALLBACK_CARD
        value = bucket_base(j) + offset + 1
        return invert_pairwise(self.perm, value - 1) + 1

    def observe(self, t: int, card: int) -> None:
        j = self._bucket_of_card[card - 1]
        self.buckets[j - 1].observe(self._offset_of_card[card - 1])
        self.first_half.observe(t, card)

    def layout(self) -> tuple[int, ...]:
        bucket_fields = tuple(b for acc in self.buckets for b in (acc.field_bits, acc.field_bits))
        return bucket_fields + self.first_half.layout()

    def state_values(self) -> list[int]:
        values = [v for acc in self.buckets for v in (acc.count, acc.sum_mod_w)]
        return values + self.first_half.state_values()

    def load_state_values(self, values: Sequence[int]) -> None:
        for i, acc in enumerate(self.buckets):
            acc.count, acc.sum_mod_w = values[2 * i], values[2 * i + 1]
        self.first_half.load_state_values(values[2 * len(self.buckets) :])


def amplification_count(delta: float) -> int:
    """Number of independent hash functions: ceil(2.5 * log2(1/delta))."""
    return math.ceil(2.5 * math.log2(1 / delta) - 1e-9)


class AmplifiedSubsetsGuesser(Guesser):
    """Several independent k-wise bucketings; guesses from the first singleton bucket.

    The first half plays a subset guesser on a random set A, as the randomized
    guesser does.
    """

    kind = GuesserKind.AMPLIFIED
    uses_turn_index = True

    def __init__(self, delta: float, k: int | None = None) -> None:
        super().__init__()
        if not 0 < delta < 1:
            raise ParamError(f"delta must lie in (0, 1), got {delta}")
        self.delta = delta
        self.k = k
        self.functions = amplification_count(delta)
        self.recovered_turns = 0  # diagnostic, not part of the memory state

    def _setup(self, n: int, long_lived: SeededStream) -> None:
        self.ell = _require_power_of_two(n)
        if self.k is None:
            self.k = 2 * self.ell
        if self.k < 2 * self.ell:
            raise ParamError(f"Amplified guesser needs k >= 2*log2(n) = {2 * self.ell}")
        spec = field_spec(self.ell)
        rng = long_lived.generator()
        labels = np.arange(n, dtype=np.int64)
        self._bucket_of_card: list[list[int]] = []
        self.collections: list[list[XorBucket]] = []
        for _ in range(self.functions):
            poly = sample_kwise(spec, self.k, rng)
            buckets = bucket_of_array(eval_poly_all(poly) + 1, self.ell)
            self._bucket_of_card.append(buckets.tolist())
            counts = np.bincount(buckets, minlength=self.ell + 1)
            collection = []
            for j in range(1, self.ell + 1):
                members = labels[buckets == j]
                xor = int(np.bitwise_xor.reduce(members)) if members.size else 0
                collection.append(XorBucket(modulus=n, remaining=int(counts[j]) % n, xor=xor))
            self.collections.append(collection)
        self.first_half = SubsetGuesser(min(n, self.ell * self.ell))
        self.first_half.start(n, GuesserRandomness(long_lived.child(1), self._on_the_fly))
        self.recovered_turns = 0

    @property
    def long_lived_bits(self) -> int:
        kwise = self.functions * kwise_seed_bits(self.ell, self.k or 0)
        return kwise + self.first_half.long_lived_bits

    def guess(self, t: int) -> int:
        cards_left = self.n - t + 1
        if 2 * cards_left > self.n:
            return self.first_half.guess(t)
        j = probe_bucket(self.n, cards_left, self.ell)
        for collection in self.collections:
            label = collection[j - 1].singleton()
            if label is not None:
                self.recovered_turns += 1
                return label + 1
        return FALLBACK_CARD

    def observe(self, t: int, card: int) -> None:
        for buckets, collection in zip(self._bucket_of_card, self.collections):
            collection[buckets[card - 1] - 1].remove(card - 1)
        self.first_half.observe(t, card)

    def layout(self) -> tuple[int, ...]:
        return (self.ell,) * (2 * self.ell * self.functions) + self.first_half.layout()

    def state_values(self) -> list[int]:
        values = [v for c in self.collections for b in c for v in (b.remaining, b.xor)]
        return values + self.first_half.state_values()

    def load_state_values(self, values: Sequence[int]) -> None:
        split = 2 * self.ell * self.functions
        it = iter(values[:split])
        for collection in self.collections:
            for bucket in collection:
                bucket.remaining, bucket.xor = next(it), next(it)
        self.first_half.load_state_values(values[split:])


class DomainRestrictedGuesser(Guesser):
    """Plays an inner strategy on the cards 1..domain and ignores all others."""

    def __init__(self, inner: Guesser, domain: int) -> None:
        super().__init__()
        self.inner = inner
        self.domain = domain
        self.kind = inner.kind  # type: ignore[misc]
        self.deterministic = inner.deterministic  # type: ignore[misc]
        self._counting = inner.uses_turn_index
        self._seen = 0

    def start(self, n: int, randomness: GuesserRandomness) -> None:
        if not 1 <= self.domain <= n:
            raise ParamError(f"Domain {self.domain} must lie in 1..{n}")
        super().start(n, randomness)
        self.inner.start(self.domain, randomness)
        self._seen = 0

    def _setup(self, n: int, long_lived: SeededStream) -> None:
        pass

    @property
    def long_lived_bits(self) -> int:
        return self.inner.long_lived_bits

    def _inner_turn(self, t: int) -> int:
        return self._seen + 1 if self._counting else t

    def guess(self, t: int) -> int:
        if self._counting and self._seen >= self.domain:
            return FALLBACK_CARD
        return self.inner.guess(self._inner_turn(t))

    def observe(self, t: int, card: int) -> None:
        if card > self.domain:
            return
        self.inner.observe(self._inner_turn(t), card)
        self._seen += 1

    def _counter_bits(self) -> tuple[int, ...]:
        return (ceil_log2(self.domain + 1),) if self._counting else ()

    def layout(self) -> tuple[int, ...]:
        return self.inner.layout() + self._counter_bits()

    def state_values(self) -> list[int]:
        counter = [self._seen] if self._counting else []
        return self.inner.state_values() + counter

    def load_state_values(self, values: Sequence[int]) -> None:
        split = len(self.inner.layout())
        self.inner.load_state_values(values[:split])
        if self._counting:
            self._seen = values[split]


def make_memoryless(card: int) -> Guesser:
    return MemorylessGuesser(card)


def make_perfect_memory() -> Guesser:
    return PerfectMemoryGuesser()


def make_subset_guesser(m: int) -> Guesser:
    return SubsetGuesser(m)


def make_power_sum_guesser(k: int) -> Guesser:
    return PowerSumGuesser(k)


def make_combined_guesser(m: int) -> Guesser:
    return CombinedGuesser(m)


def make_following_subsets(delta: float = 1.0) -> Guesser:
    return FollowingSubsetsGuesser(delta)


def make_randomized_subsets() -> Guesser:
    return RandomizedSubsetsGuesser()


def make_amplified_subsets(delta: float, k: int | None = None) -> Guesser:
    return AmplifiedSubsetsGuesser(delta, k)
