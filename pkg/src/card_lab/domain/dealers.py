"""Dealer strategies.

A dealer commits the card of turn t with :meth:`Dealer.draw` before it sees the
guess, answers the drawable-set predicate for that guess, and completes the turn
in :meth:`Dealer.observe_guess`. How a card is chosen from a candidate set is
delegated to a :class:`CardPicker`, so the uniform MtBE dealer and its min-order
reimplementation share one epoch machine.
"""
from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from collections.abc import Callable, Iterable, Sequence
from collections.abc import Set as AbstractSet
from fractions import Fraction
from typing import ClassVar

import numpy as np
import numpy.typing as npt

from card_lab.domain.entities import (
    EpochParams,
    MinOrderRandomness,
    MtbeSchedule,
    UniversalSchedule,
)
from card_lab.domain.exceptions import (
    InvalidArrangement,
    InvalidRandomness,
    NotDeterministic,
    ParamError,
    ProtocolViolation,
)
from card_lab.domain.guessers import Guesser
from card_lab.domain.randomness import GOLDEN_GAMMA, MASK64, SeededStream, derive_streams, mix
from card_lab.domain.value_objects import DealerKind

logger = logging.getLogger(__name__)

_UNIFORM_BUFFER = 4096
_REJECTION_TRIES = 32


class Deck:
    """The undrawn cards, with O(1) membership, removal and indexed access."""

    def __init__(self, cards: Iterable[int], n: int) -> None:
        self._cards = np.fromiter(cards, dtype=np.int64)
        self._size = int(self._cards.size)
        self._pos = np.full(n + 1, -1, dtype=np.int64)
        if self._size and (self._cards.min() < 1 or self._cards.max() > n):
            raise ParamError(f"Deck cards must lie in 1..{n}")
        self._pos[self._cards] = np.arange(self._size)
        if int((self._pos >= 0).sum()) != self._size:
            raise ParamError("Deck contains repeated cards")

    @classmethod
    def full(cls, n: int) -> Deck:
        return cls(range(1, n + 1), n)

    def __len__(self) -> int:
        return self._size

    def __contains__(self, card: object) -> bool:
        if not isinstance(card, (int, np.integer)) or not 0 < card < self._pos.size:
            return False
        return bool(self._pos[card] >= 0)

    def card_at(self, index: int) -> int:
        return int(self._cards[index])

    def view(self) -> npt.NDArray[np.int64]:
        """Current cards in internal order; invalidated by the next removal."""
        return self._cards[: self._size]

    def sorted_cards(self) -> list[int]:
        return sorted(self.view().tolist())

    def remove(self, card: int) -> None:
        i = int(self._pos[card]) if card in self else -1
        if i < 0:
            raise ProtocolViolation(f"Card {card} is not in the deck")
        last = int(self._cards[self._size - 1])
        self._cards[i] = last
        self._pos[last] = i
        self._pos[card] = -1
        self._size -= 1


# ---------------------------------------------------------------------------
# Pickers: how a card is chosen from deck minus an excluded set
# ---------------------------------------------------------------------------


class CardPicker(ABC):
    @abstractmethod
    def pick(self, t: int, deck: Deck, excluded: AbstractSet[int]) -> int: ...


def _candidates(deck: Deck, excluded: AbstractSet[int]) -> list[int]:
    return [c for c in deck.sorted_cards() if c not in excluded]


class UniformPicker(CardPicker):
    """Uniform over deck minus excluded, by rejection with an exact fallback."""

    def __init__(self, rng: np.random.Generator) -> None:
        self._rng = rng
        self._buffer = np.empty(0)
        self._next = 0

    def _uniform(self) -> float:
        if self._next >= self._buffer.size:
            self._buffer = self._rng.random(_UNIFORM_BUFFER)
            self._next = 0
        u = float(self._buffer[self._next])
        self._next += 1
        return u

    def _index(self, size: int) -> int:
        return min(size - 1, int(self._uniform() * size))

    def pick(self, t: int, deck: Deck, excluded: AbstractSet[int]) -> int:
        if len(deck) == 0:
            raise ProtocolViolation("Cannot draw from an empty deck")
        if not excluded:
            return deck.card_at(self._index(len(deck)))
        for _ in range(_REJECTION_TRIES):
            card = deck.card_at(self._index(len(deck)))
            if card not in excluded:
                return card
        candidates = _candidates(deck, excluded)
        if not candidates:
            raise ProtocolViolation("Every remaining card is excluded")
        return candidates[self._index(len(candidates))]


def _splitmix64_array(x: npt.NDArray[np.uint64]) -> npt.NDArray[np.uint64]:
    """Vectorised splitmix64; uint64 arithmetic wraps like the scalar MASK64 version."""
    z = x + np.uint64(GOLDEN_GAMMA)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def order_priority(key: int, t: int, card: int) -> int:
    """Position key of ``card`` in the lazily realised permutation pi_t; smaller draws first."""
    return mix(key, t, card)


class MinOrderPicker(CardPicker):
    """Draws the pi_t-minimum card of deck minus excluded."""

    def __init__(self, randomness: MinOrderRandomness, n: int) -> None:
        self._key = randomness.key & MASK64
        self._ranks: list[npt.NDArray[np.int64]] | None = None
        if randomness.permutations is not None:
            if len(randomness.permutations) < n:
                count = len(randomness.permutations)
                raise InvalidRandomness(f"Need {n} permutations, got {count}")
            self._ranks = []
            for perm in randomness.permutations:
                if sorted(perm) != list(range(1, n + 1)):
                    raise InvalidRandomness("Every pi_t must be a permutation of 1..n")
                ranks = np.zeros(n + 1, dtype=np.int64)
                ranks[np.asarray(perm)] = np.arange(n)
                self._ranks.append(ranks)

    def pick(self, t: int, deck: Deck, excluded: AbstractSet[int]) -> int:
        cards = deck.view()
        if excluded:
            cards = cards[~np.isin(cards, np.fromiter(excluded, dtype=np.int64))]
        if cards.size == 0:
            raise ProtocolViolation("Every remaining card is excluded")
        if self._ranks is not None:
            return int(cards[np.argmin(self._ranks[t - 1][cards])])
        prefix = np.uint64(mix(self._key, t))
        priorities = _splitmix64_array(cards.astype(np.uint64) ^ prefix)
        best = np.flatnonzero(priorities == priorities.min())
        return int(cards[best].min())


class ChoiceNeeded(Exception):
    """A scripted picker ran out of choices; ``options`` is the candidate count."""

    def __init__(self, options: int) -> None:
        self.options = options
        super().__init__(options)


class ScriptedPicker(CardPicker):
    """Takes the i-th smallest candidate, i read from a fixed script."""

    def __init__(self, script: Sequence[int]) -> None:
        self._script = script
        self._next = 0

    def pick(self, t: int, deck: Deck, excluded: AbstractSet[int]) -> int:
        candidates = _candidates(deck, excluded)
        if self._next >= len(self._script):
            raise ChoiceNeeded(len(candidates))
        choice = self._script[self._next]
        self._next += 1
        return candidates[choice]


def exact_draw_distribution(
    play: Callable[[CardPicker], Sequence[int]],
) -> dict[tuple[int, ...], Fraction]:
    """Exact distribution of ``play``'s draw sequence when every pick is uniform.

    ``play`` runs one full game with the given picker and returns the draws. The
    choice tree is walked depth first, replaying from scratch at every node.
    """
    out: dict[tuple[int, ...], Fraction] = {}
    stack: list[tuple[list[int], Fraction]] = [([], Fraction(1))]
    while stack:
        script, weight = stack.pop()
        try:
            draws = tuple(play(ScriptedPicker(script)))
        except ChoiceNeeded as need:
            for i in range(need.options):
                stack.append(([*script, i], weight / need.options))
            continue
        out[draws] = out.get(draws, Fraction(0)) + weight
    return out


# ---------------------------------------------------------------------------
# Dealers
# ---------------------------------------------------------------------------


class Dealer(ABC):
    kind: ClassVar[DealerKind]

    def __init__(self) -> None:
        self._n = 0
        self._pending: int | None = None

    @property
    def n(self) -> int:
        return self._n

    def start(self, n: int, stream: SeededStream) -> None:
        self._n = n
        self._pending = None
        self._setup(n, stream)

    @abstractmethod
    def _setup(self, n: int, stream: SeededStream) -> None: ...

    def draw(self, t: int) -> int:
        """Commit the card of turn t; it stays drawable until :meth:`observe_guess`."""
        if self._pending is not None:
            raise ProtocolViolation(f"Turn {t} drawn before the previous turn completed")
        card = self._commit(t)
        self._pending = card
        return card

    @abstractmethod
    def _commit(self, t: int) -> int: ...

    @abstractmethod
    def is_drawable(self, card: int) -> bool: ...

    def observe_guess(self, t: int, guess: int) -> None:
        if self._pending is None:
            raise ProtocolViolation(f"Guess of turn {t} observed before a draw")
        drawn, self._pending = self._pending, None
        self._complete(t, drawn, guess)

    @abstractmethod
    def _complete(self, t: int, drawn: int, guess: int) -> None: ...

    def epoch_of(self, t: int) -> int | None:
        return None

    @property
    def epoch_count(self) -> int:
        return 0


class _ArrangedDealer(Dealer):
    """Plays a fixed order; drawable means not yet drawn."""

    def _setup(self, n: int, stream: SeededStream) -> None:
        self._order = self._arrangement(n, stream)
        self._drawn = np.zeros(n + 1, dtype=bool)

    @abstractmethod
    def _arrangement(self, n: int, stream: SeededStream) -> Sequence[int]: ...

    def _commit(self, t: int) -> int:
        return int(self._order[t - 1])

    def is_drawable(self, card: int) -> bool:
        return 1 <= card <= self.n and not self._drawn[card]

    def _complete(self, t: int, drawn: int, guess: int) -> None:
        self._drawn[drawn] = True


class RandomShuffleDealer(_ArrangedDealer):
    kind = DealerKind.SHUFFLE

    def _arrangement(self, n: int, stream: SeededStream) -> Sequence[int]:
        return (stream.generator().permutation(n) + 1).tolist()


def validate_arrangement(arrangement: Sequence[int], n: int | None = None) -> tuple[int, ...]:
    cards = tuple(int(c) for c in arrangement)
    size = len(cards) if n is None else n
    if len(cards) != size or sorted(cards) != list(range(1, size + 1)):
        raise InvalidArrangement(f"Arrangement is not a permutation of 1..{size}")
    return cards


class StaticDealer(_ArrangedDealer):
    kind = DealerKind.STATIC

    def __init__(self, arrangement: Sequence[int]) -> None:
        super().__init__()
        self.arrangement = validate_arrangement(arrangement)

    def _arrangement(self, n: int, stream: SeededStream) -> Sequence[int]:
        if len(self.arrangement) != n:
            raise InvalidArrangement(f"Arrangement has {len(self.arrangement)} cards, deck has {n}")
        return self.arrangement


def make_random_shuffle() -> Dealer:
    return RandomShuffleDealer()


def make_static(arrangement: Sequence[int]) -> Dealer:
    return StaticDealer(arrangement)


def adversarial_arrangement_for(guesser: Guesser, n: int) -> tuple[int, ...]:
    """Offline play against a deterministic guesser, never drawing its current guess.

    Only the last card is forced, so the guesser scores at most one.
    """
    if not guesser.deterministic:
        raise NotDeterministic(f"{guesser.kind.value} guesser uses random bits")
    guesser.start(n, derive_streams(0, 0).guesser)
    remaining = list(range(1, n + 1))
    order: list[int] = []
    for t in range(1, n + 1):
        g = guesser.guess(t)
        card = remaining[1] if remaining[0] == g and len(remaining) > 1 else remaining[0]
        remaining.remove(card)
        guesser.observe(t, card)
        order.append(card)
    return tuple(order)


# ---------------------------------------------------------------------------
# Move-to-the-Back epochs
# ---------------------------------------------------------------------------


class MtbeEpoch:
    """One (k, ell)-epoch: draws from deck minus B, moves first-time guesses to B."""

    def __init__(self, params: EpochParams, deck: Deck, picker: CardPicker) -> None:
        if len(deck) != params.k:
            raise ParamError(f"Epoch starts with {params.k} cards left, deck has {len(deck)}")
        self.params = params
        self.deck = deck
        self.picker = picker
        self.back: set[int] = set()

    def draw(self, t: int) -> int:
        return self.picker.pick(t, self.deck, self.back)

    def is_drawable(self, card: int) -> bool:
        return card in self.deck and card not in self.back

    def complete_turn(self, drawn: int, guess: int) -> None:
        self.deck.remove(drawn)
        if guess in self.deck and len(self.back) < self.params.u:
            self.back.add(guess)


def make_mtbe_epoch(params: EpochParams, deck: Deck, picker: CardPicker) -> MtbeEpoch:
    return MtbeEpoch(params, deck, picker)


class EpochDealer(Dealer):
    """Random phase, a run of MtBE epochs, then random draws to the end.

    Before the first epoch the picker skips ``reserved`` (min-order's set D).
    Outside epochs nothing is held back.
    """

    kind = DealerKind.MTBE

    def __init__(
        self,
        epochs: Sequence[EpochParams],
        picker: CardPicker | None = None,
        reserved: frozenset[int] | None = None,
    ) -> None:
        super().__init__()
        starts = [e.k for e in epochs]
        if any(a - ep.ell < b for a, b, ep in zip(starts, starts[1:], epochs)):
            raise ParamError("Epochs overlap")
        self.epochs = tuple(epochs)
        self._picker = picker
        self.reserved = reserved

    def _make_picker(self, n: int, stream: SeededStream) -> CardPicker:
        return UniformPicker(stream.generator())

    def _setup(self, n: int, stream: SeededStream) -> None:
        if self.epochs and self.epochs[0].k > n:
            raise ParamError(f"First epoch starts with {self.epochs[0].k} cards, deck has {n}")
        self.picker = self._picker if self._picker is not None else self._make_picker(n, stream)
        self.deck = Deck.full(n)
        self.current: MtbeEpoch | None = None
        self._current_index: int | None = None

    def _index_for(self, cards_left: int) -> int | None:
        for i, params in enumerate(self.epochs):
            if params.covers(cards_left):
                return i
        return None

    def _commit(self, t: int) -> int:
        cards_left = self.n - t + 1
        index = self._index_for(cards_left)
        if index is None:
            self.current = None
            self._current_index = None
        elif index != self._current_index:
            self.current = make_mtbe_epoch(self.epochs[index], self.deck, self.picker)
            self._current_index = index
        if self.current is not None:
            return self.current.draw(t)
        excluded: AbstractSet[int] = frozenset()
        if self.reserved is not None and self.epochs and cards_left > self.epochs[0].k:
            excluded = self.reserved
        return self.picker.pick(t, self.deck, excluded)

    def is_drawable(self, card: int) -> bool:
        if self.current is not None:
            return self.current.is_drawable(card)
        return card in self.deck

    def _complete(self, t: int, drawn: int, guess: int) -> None:
        if self.current is not None:
            self.current.complete_turn(drawn, guess)
        else:
            self.deck.remove(drawn)

    def epoch_of(self, t: int) -> int | None:
        index = self._index_for(self.n - t + 1)
        return None if index is None else index + 1

    @property
    def epoch_count(self) -> int:
        return len(self.epochs)


def make_mtbe_dealer(schedule: MtbeSchedule, picker: CardPicker | None = None) -> Dealer:
    return EpochDealer(schedule.epochs, picker=picker)


class MinOrderDealer(EpochDealer):
    """MtBE driven by min-order draws. Deterministic once its randomness is fixed."""

    kind = DealerKind.MTBE_MINORDER

    def __init__(
        self, schedule: MtbeSchedule, randomness: MinOrderRandomness | None = None
    ) -> None:
        reserved = None
        if randomness is not None:
            reserved = self._check_reserved(randomness, schedule)
        super().__init__(schedule.epochs, reserved=reserved)
        self.schedule = schedule
        self.randomness = randomness

    @staticmethod
    def _check_reserved(randomness: MinOrderRandomness, schedule: MtbeSchedule) -> frozenset[int]:
        reserved = randomness.reserved
        if reserved is None or len(reserved) != schedule.k1:
            size = "no" if reserved is None else len(reserved)
            raise InvalidRandomness(f"Reserved set needs {schedule.k1} cards, got {size}")
        if any(not 1 <= c <= schedule.n for c in reserved):
            raise InvalidRandomness(f"Reserved cards must lie in 1..{schedule.n}")
        return reserved

    def _make_picker(self, n: int, stream: SeededStream) -> CardPicker:
        randomness = self.randomness
        if randomness is None:
            rng = stream.generator()
            reserved = frozenset((rng.choice(n, size=self.schedule.k1, replace=False) + 1).tolist())
            randomness = MinOrderRandomness(reserved=reserved, key=stream.word(0))
            self.reserved = reserved
        return MinOrderPicker(randomness, n)

    def _setup(self, n: int, stream: SeededStream) -> None:
        if n != self.schedule.n:
            raise ParamError(f"Schedule is for n={self.schedule.n}, deck has {n}")
        if self.randomness is None:
            self.reserved = None
        super()._setup(n, stream)


def make_minorder_dealer(
    schedule: MtbeSchedule, randomness: MinOrderRandomness | None = None
) -> Dealer:
    return MinOrderDealer(schedule, randomness)


class UniversalDealer(EpochDealer):
    kind = DealerKind.UNIVERSAL

    def __init__(self, schedule: UniversalSchedule) -> None:
        super().__init__(schedule.epochs)
        self.schedule = schedule
        if not schedule.epochs:
            logger.info("Universal schedule for n=%d is empty; dealing uniformly", schedule.n)


def make_universal_dealer(schedule: UniversalSchedule) -> Dealer:
    return UniversalDealer(schedule)

