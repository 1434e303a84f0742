"""CSV writers for sweep results and per-turn transcripts."""
from __future__ import annotations

import csv
from collections.abc import Iterable
from typing import TextIO

from card_lab.application.experiment_service import SweepRow
from card_lab.domain.entities import StatResult, Transcript

SWEEP_HEADER = (
    "guesser",
    "dealer",
    "n",
    "m",
    "delta",
    "trials",
    "mean_correct",
    "stderr_correct",
    "mean_reasonable",
    "stderr_reasonable",
    "theory_name",
    "theory_value",
    "error",
)

TRANSCRIPT_HEADER = ("trial", "t", "guess", "draw", "reasonable", "correct")

STAT_HEADER = (
    "scope",
    "trials",
    "mean_correct",
    "stderr_correct",
    "mean_reasonable",
    "stderr_reasonable",
)


def _num(value: float | None) -> str:
    # Fixed precision, '.' separator regardless of locale.
    return "" if value is None else f"{value:.6f}"


def _opt(value: object | None) -> str:
    return "" if value is None else str(value)


def sweep_record(row: SweepRow) -> list[str]:
    cell = row.cell
    result = row.result
    stats: list[str] = ["", "", "", ""]
    if result is not None:
        stats = [
            _num(result.mean_correct),
            _num(result.stderr_correct),
            _num(result.mean_reasonable),
            _num(result.stderr_reasonable),
        ]
    return [
        cell.guesser.value,
        cell.dealer.value,
        str(cell.n),
        _opt(cell.m),
        _opt(cell.delta),
        str(row.trials),
        *stats,
        row.theory_name,
        _num(row.theory_value),
        row.error,
    ]


def write_sweep_csv(rows: Iterable[SweepRow], out: TextIO) -> None:
    """Header plus one record per row, in the order given."""
    writer = csv.writer(out, delimiter=",", lineterminator="\n")
    writer.writerow(SWEEP_HEADER)
    for row in rows:
        writer.writerow(sweep_record(row))


def write_transcripts_csv(transcripts: Iterable[Transcript], out: TextIO) -> int:
    """Writes every turn of every transcript; returns the number of turns written."""
    writer = csv.writer(out, delimiter=",", lineterminator="\n")
    writer.writerow(TRANSCRIPT_HEADER)
    written = 0
    for trial, transcript in enumerate(transcripts):
        for turn in transcript.turns:
            writer.writerow(
                [trial, turn.t, turn.guess, turn.draw, int(turn.reasonable), int(turn.correct)]
            )
            written += 1
    return written


def write_stat_csv(result: StatResult, out: TextIO) -> None:
    """Single-experiment CSV: one overall row, then one row per epoch."""
    writer = csv.writer(out, delimiter=",", lineterminator="\n")
    writer.writerow(STAT_HEADER)
    writer.writerow(
        [
            "all",
            result.trials,
            _num(result.mean_correct),
            _num(result.stderr_correct),
            _num(result.mean_reasonable),
            _num(result.stderr_reasonable),
        ]
    )
    epochs = zip(
        result.epoch_correct,
        result.epoch_correct_stderr,
        result.epoch_reasonable,
        result.epoch_reasonable_stderr,
    )
    for i, (correct, correct_se, reasonable, reasonable_se) in enumerate(epochs, start=1):
        writer.writerow(
            [
                f"epoch_{i}",
                result.trials,
                _num(correct),
                _num(correct_se),
                _num(reasonable),
                _num(reasonable_se),
            ]
        )
