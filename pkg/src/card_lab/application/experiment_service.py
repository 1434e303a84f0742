from __future__ import annotations

import logging
import math
from collections.abc import Iterable, Iterator, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from pydantic import ValidationError

from card_lab.application.config import ExperimentConfig, GridCell
from card_lab.application.registry import DealerFactory, build_guesser, dealer_factory
from card_lab.application.theory import curve_for
from card_lab.domain.engine import play_game
from card_lab.domain.entities import GameConfig, StatResult, Transcript
from card_lab.domain.exceptions import CardLabError, Infeasible
from card_lab.domain.randomness import derive_streams
from card_lab.domain.services import score
from card_lab.infrastructure.cache import TTLCache

logger = logging.getLogger(__name__)


@dataclass
class _Moments:
    """Integer sum and sum of squares; merging is order-independent."""

    total: int = 0
    squares: int = 0

    def add(self, value: int) -> None:
        self.total += value
        self.squares += value * value

    def mean(self, trials: int) -> float:
        return self.total / trials

    def stderr(self, trials: int) -> float:
        if trials < 2:
            return 0.0
        spread = max(0, trials * self.squares - self.total * self.total)
        return math.sqrt(spread / (trials * (trials - 1)) / trials)


@dataclass
class _Tally:
    epochs: int
    correct: _Moments = field(default_factory=_Moments)
    reasonable: _Moments = field(default_factory=_Moments)
    epoch_phase: _Moments = field(default_factory=_Moments)
    epoch_correct: list[_Moments] = field(default_factory=list)
    epoch_reasonable: list[_Moments] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.epoch_correct = [_Moments() for _ in range(self.epochs)]
        self.epoch_reasonable = [_Moments() for _ in range(self.epochs)]

    def add(self, transcript: Transcript) -> None:
        summary = score(transcript)
        self.correct.add(summary.correct)
        self.reasonable.add(summary.reasonable)
        for i in range(self.epochs):
            self.epoch_correct[i].add(summary.epoch_correct.get(i + 1, 0))
            self.epoch_reasonable[i].add(summary.epoch_reasonable.get(i + 1, 0))
        self.epoch_phase.add(sum(summary.epoch_correct.values()))

    def result(self, trials: int) -> StatResult:
        return StatResult(
            trials=trials,
            mean_correct=self.correct.mean(trials),
            stderr_correct=self.correct.stderr(trials),
            mean_reasonable=self.reasonable.mean(trials),
            stderr_reasonable=self.reasonable.stderr(trials),
            epoch_reasonable=tuple(e.mean(trials) for e in self.epoch_reasonable),
            epoch_reasonable_stderr=tuple(e.stderr(trials) for e in self.epoch_reasonable),
            epoch_correct=tuple(e.mean(trials) for e in self.epoch_correct),
            epoch_correct_stderr=tuple(e.stderr(trials) for e in self.epoch_correct),
            epoch_phase_correct=self.epoch_phase.mean(trials),
            epoch_phase_correct_stderr=self.epoch_phase.stderr(trials),
        )


def _factory(config: ExperimentConfig) -> DealerFactory:
    return dealer_factory(config.dealer, config.guesser, config.n, config.m, config.master_seed)


def iter_transcripts(
    config: ExperimentConfig,
    trials: Iterable[int],
    make_dealer: DealerFactory | None = None,
) -> Iterator[Transcript]:
    """Play the given trial indices of an experiment, one fresh guesser and dealer each."""
    make_dealer = make_dealer or _factory(config)
    game = GameConfig(
        n=config.n,
        m=config.m,
        master_seed=config.master_seed,
        enforce_memory=config.strict_memory,
    )
    for trial in trials:
        streams = derive_streams(config.master_seed, trial)
        transcript = play_game(build_guesser(config.guesser), make_dealer(), game, streams)
        logger.debug("Trial %d finished with %d correct", trial, score(transcript).correct)
        yield transcript


def _chunks(trials: int, workers: int) -> list[range]:
    size = math.ceil(trials / workers)
    return [range(start, min(trials, start + size)) for start in range(0, trials, size)]


def _run_chunk(config: ExperimentConfig, trials: range, make_dealer: DealerFactory) -> _Tally:
    tally = _Tally(make_dealer().epoch_count)
    for transcript in iter_transcripts(config, trials, make_dealer):
        tally.add(transcript)
    return tally


def monte_carlo(config: ExperimentConfig, workers: int | None = None) -> StatResult:
    """Run ``config.trials`` independent games and aggregate their scores.

    Trials are split across worker threads; sums are merged afterwards, so the
    result does not depend on the worker count.
    """
    pool_size = max(1, min(workers or config.workers, config.trials))
    logger.info(
        "Running %d trials of %s vs %s at n=%d on %d worker(s)",
        config.trials,
        config.guesser.kind.value,
        config.dealer.kind.value,
        config.n,
        pool_size,
    )
    make_dealer = _factory(config)
    epochs = make_dealer().epoch_count
    chunks = _chunks(config.trials, pool_size)
    with ThreadPoolExecutor(max_workers=pool_size, thread_name_prefix="card-lab") as pool:
        tallies = list(pool.map(lambda chunk: _run_chunk(config, chunk, make_dealer), chunks))
    merged = _Tally(epochs)
    for tally in tallies:
        _merge(merged, tally)
    return merged.result(config.trials)


def _merge(into: _Tally, other: _Tally) -> None:
    pairs = [
        (into.correct, other.correct),
        (into.reasonable, other.reasonable),
        (into.epoch_phase, other.epoch_phase),
        *zip(into.epoch_correct, other.epoch_correct),
        *zip(into.epoch_reasonable, other.epoch_reasonable),
    ]
    for a, b in pairs:
        a.total += b.total
        a.squares += b.squares


@dataclass(frozen=True)
class SweepRow:
    cell: GridCell
    trials: int
    result: StatResult | None
    theory_name: str = ""
    theory_value: float | None = None
    error: str = ""


def sweep(
    cells: Sequence[GridCell],
    trials: int,
    master_seed: int = 0,
    workers: int = 1,
) -> list[SweepRow]:
    """One row per grid cell, in grid order. Cells that fail become error rows."""
    rows = []
    for cell in cells:
        theory = curve_for(cell)
        theory_name, theory_value = (theory[0].value, theory[1]) if theory else ("", None)
        cell_trials = cell.trials or trials
        result: StatResult | None = None
        error = ""
        try:
            result = monte_carlo(cell.experiment(trials, master_seed, workers))
        except Infeasible as exc:
            logger.warning("Skipping infeasible cell n=%d m=%s: %s", cell.n, cell.m, exc.reason)
            error = "infeasible"
        except (CardLabError, ValidationError) as exc:
            logger.warning("Skipping cell n=%d %s: %s", cell.n, cell.guesser.value, exc)
            error = f"invalid: {type(exc).__name__}"
        rows.append(SweepRow(cell, cell_trials, result, theory_name, theory_value, error))
    return rows


class ExperimentService:
    """Runs experiments and memoises their results for the MCP surface."""

    def __init__(self, cache: TTLCache[StatResult], workers: int = 1) -> None:
        self._cache = cache
        self._workers = workers

    def simulate(self, config: ExperimentConfig) -> StatResult:
        key = config.model_dump_json()
        return self._cache.get_or_compute(key, lambda: monte_carlo(config, self._workers))
