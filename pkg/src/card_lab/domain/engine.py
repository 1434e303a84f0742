"""Turn loop between one guesser and one dealer.

Per turn: the dealer commits d_t, the guesser guesses g_t, the engine records
whether g_t was drawable, the guesser sees d_t, and finally the dealer sees g_t.
"""
from __future__ import annotations

import logging

from card_lab.domain.dealers import Dealer, make_random_shuffle
from card_lab.domain.entities import GameConfig, Transcript, TurnRecord
from card_lab.domain.exceptions import MemoryBudgetExceeded, ProtocolViolation
from card_lab.domain.guessers import Guesser
from card_lab.domain.randomness import RandomnessStreams, derive_streams

logger = logging.getLogger(__name__)


class GameSession:
    """One game, playable turn by turn so callers can snapshot the guesser mid-game."""

    def __init__(
        self,
        guesser: Guesser,
        dealer: Dealer,
        config: GameConfig,
        streams: RandomnessStreams,
    ) -> None:
        self.guesser = guesser
        self.dealer = dealer
        self.config = config
        self.transcript = Transcript(config=config)
        self._drawn = bytearray(config.n + 1)
        self.t = 0  # turns completed
        guesser.start(config.n, streams.guesser)
        dealer.start(config.n, streams.dealer_stream)
        if not config.enforce_memory:
            self.transcript.peak_state_bits = guesser.declared_bits
        self._check_memory()

    @property
    def finished(self) -> bool:
        return self.t >= self.config.n

    def _check_memory(self) -> None:
        if not self.config.enforce_memory:
            return
        bits = len(self.guesser.export_state())
        self.transcript.peak_state_bits = max(self.transcript.peak_state_bits, bits)
        if bits > self.config.m:
            raise MemoryBudgetExceeded(bits=bits, budget=self.config.m, turn=self.t)

    def step(self) -> TurnRecord:
        n = self.config.n
        if self.finished:
            raise ProtocolViolation(f"All {n} cards have been played")
        t = self.t + 1
        epoch = self.dealer.epoch_of(t)
        draw = self.dealer.draw(t)
        if not 1 <= draw <= n or self._drawn[draw]:
            raise ProtocolViolation(f"Dealer drew card {draw} at turn {t}: drawn before or invalid")
        if not self.dealer.is_drawable(draw):
            raise ProtocolViolation(f"Dealer drew card {draw} outside its own drawable set")
        guess = self.guesser.guess(t)
        reasonable = self.dealer.is_drawable(guess)
        self.guesser.observe(t, draw)
        self._drawn[draw] = 1
        self.t = t
        self._check_memory()
        self.dealer.observe_guess(t, guess)
        record = TurnRecord(
            t=t,
            guess=guess,
            draw=draw,
            reasonable=reasonable,
            correct=guess == draw,
            epoch=epoch,
        )
        self.transcript.turns.append(record)
        return record

    def play_out(self) -> Transcript:
        while not self.finished:
            self.step()
        return self.transcript


def play_game(
    guesser: Guesser,
    dealer: Dealer,
    config: GameConfig,
    streams: RandomnessStreams,
) -> Transcript:
    """Play a full game and return its transcript."""
    return GameSession(guesser, dealer, config, streams).play_out()


def assert_memory_bound(
    guesser: Guesser,
    m: int,
    n: int,
    streams: RandomnessStreams | None = None,
) -> bool:
    """True iff the guesser's serialized state stays within m bits for a whole game.

    The game is played against a random shuffle with strict memory enforcement.
    """
    config = GameConfig(n=n, m=m, enforce_memory=True)
    try:
        play_game(guesser, make_random_shuffle(), config, streams or derive_streams(0, 0))
    except MemoryBudgetExceeded as exc:
        logger.debug("Memory bound %d exceeded: %s", m, exc)
        return False
    return True
