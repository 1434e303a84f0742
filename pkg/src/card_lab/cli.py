"""Command-line surface: ``card-lab simulate|sweep|params|codec-roundtrip``.

Exit codes: 0 on success, 1 on usage errors or failed round trips, 2 when a
configuration is infeasible or invalid.
"""
from __future__ import annotations

import argparse
import itertools
import logging
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import NoReturn, TextIO

from pydantic import ValidationError

from card_lab import settings
from card_lab.application.codec_service import roundtrip_campaign
from card_lab.application.config import DealerSpec, ExperimentConfig, GridCell, GuesserSpec
from card_lab.application.experiment_service import iter_transcripts, monte_carlo, sweep
from card_lab.application.registry import schedule_summary, shrink_domain
from card_lab.domain.entities import StatResult
from card_lab.domain.exceptions import CardLabError, Infeasible
from card_lab.domain.value_objects import ArrangementPattern, CodecKind, DealerKind, GuesserKind
from card_lab.infrastructure.csv_export import (
    write_stat_csv,
    write_sweep_csv,
    write_transcripts_csv,
)
from card_lab.infrastructure.grid_file import load_arrangement, load_grid

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONFIG = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _choices(enum: type[GuesserKind] | type[DealerKind] | type[CodecKind]) -> list[str]:
    return [member.value for member in enum]


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--trials", type=int, default=1000, help="Games per experiment")
    parser.add_argument("--seed", type=int, default=0, help="Master seed")
    parser.add_argument(
        "--workers", type=int, default=settings.WORKERS, help="Worker threads for trials"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="card-lab", description="Memory-bounded card guessing lab")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v info, -vv debug")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sim = sub.add_parser("simulate", help="Run one experiment and print its statistics")
    sim.add_argument("--guesser", required=True, choices=_choices(GuesserKind))
    sim.add_argument("--dealer", required=True, choices=_choices(DealerKind))
    sim.add_argument("--n", type=int, required=True, help="Number of cards")
    sim.add_argument("--m", type=int, help="Subset size or memory budget in bits")
    sim.add_argument("--delta", type=float, help="Range growth or failure rate")
    sim.add_argument("--k", type=int, help="Power-sum count or hash independence")
    sim.add_argument("--card", type=int, default=1, help="Memoryless guess")
    sim.add_argument("--pattern", choices=[p.value for p in ArrangementPattern])
    sim.add_argument("--arrangement-file", type=Path, help="Static arrangement, first line")
    domain = sim.add_mutually_exclusive_group()
    domain.add_argument("--domain", type=int, help="Restrict the guesser to cards 1..DOMAIN")
    domain.add_argument(
        "--shrink", action="store_true", help="Shrink the guesser's domain to fit in --m bits"
    )
    sim.add_argument("--strict-memory", action="store_true", help="Check state size every turn")
    sim.add_argument("--csv", type=Path, help="Also write the statistics as CSV")
    sim.add_argument("--transcripts", type=Path, help="Write every turn of every game as CSV")
    _add_common(sim)

    sw = sub.add_parser("sweep", help="Run a grid of experiments and emit CSV")
    sw.add_argument("--grid", type=Path, help="Grid file, one JSON cell per line")
    sw.add_argument("--n", type=int, action="append", default=[], dest="ns")
    sw.add_argument("--m", type=int, action="append", default=[], dest="ms")
    sw.add_argument("--guesser", action="append", default=[], dest="guessers")
    sw.add_argument("--dealer", action="append", default=[], dest="dealers")
    sw.add_argument("--delta", type=float)
    sw.add_argument("--out", type=Path, help="CSV path (default stdout)")
    _add_common(sw)

    params = sub.add_parser("params", help="Print an adaptive dealer's epoch schedule")
    params.add_argument(
        "--dealer",
        required=True,
        choices=[DealerKind.MTBE.value, DealerKind.MTBE_MINORDER.value, DealerKind.UNIVERSAL.value],
    )
    params.add_argument("--n", type=int, required=True)
    params.add_argument("--m", type=int)

    codec = sub.add_parser("codec-roundtrip", help="Round-trip random instances through a codec")
    codec.add_argument("--codec", required=True, choices=_choices(CodecKind))
    codec.add_argument("--n", type=int, required=True)
    codec.add_argument("--k", type=int, required=True, help="Suffix length or reserved-set size")
    codec.add_argument("--alpha", type=int, required=True)
    codec.add_argument("--ell", type=int, default=2, help="Epoch length of the toy schedule")
    codec.add_argument("--epoch", type=int, default=1, help="Epoch the unordered codec targets")
    codec.add_argument("--trials", type=int, default=1000)
    codec.add_argument("--seed", type=int, default=0)
    return parser


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------


def _experiment(args: argparse.Namespace) -> ExperimentConfig:
    guesser = GuesserSpec(
        kind=GuesserKind(args.guesser),
        m=args.m,
        k=args.k,
        delta=args.delta,
        card=args.card,
        domain=args.domain,
    )
    if args.shrink:
        guesser = shrink_domain(guesser, args.m, args.n)
    kind = DealerKind(args.dealer)
    arrangement = load_arrangement(args.arrangement_file, args.n) if args.arrangement_file else None
    pattern = ArrangementPattern(args.pattern) if args.pattern else None
    if kind is DealerKind.STATIC and arrangement is None and pattern is None:
        pattern = ArrangementPattern.RANDOM
    dealer = DealerSpec(kind=kind, m=args.m, pattern=pattern, arrangement=arrangement)
    return ExperimentConfig(
        guesser=guesser,
        dealer=dealer,
        n=args.n,
        m=args.m or 0,
        trials=args.trials,
        master_seed=args.seed,
        strict_memory=args.strict_memory,
        workers=max(1, args.workers),
    )


def format_stats(result: StatResult, out: TextIO) -> None:
    out.write(f"trials           {result.trials}\n")
    out.write(f"mean_correct     {result.mean_correct:.4f} ± {result.stderr_correct:.4f}\n")
    out.write(f"mean_reasonable  {result.mean_reasonable:.4f} ± {result.stderr_reasonable:.4f}\n")
    if not result.epoch_correct:
        return
    out.write("epoch  reasonable          correct\n")
    rows = zip(
        result.epoch_reasonable,
        result.epoch_reasonable_stderr,
        result.epoch_correct,
        result.epoch_correct_stderr,
    )
    for i, (r, r_se, c, c_se) in enumerate(rows, start=1):
        out.write(f"{i:>5}  {r:8.4f} ± {r_se:<7.4f}  {c:.4f} ± {c_se:.4f}\n")
    out.write(
        f"epoch phase correct {result.epoch_phase_correct:.4f} "
        f"± {result.epoch_phase_correct_stderr:.4f}\n"
    )


def _simulate(args: argparse.Namespace) -> int:
    config = _experiment(args)
    result = monte_carlo(config)
    format_stats(result, sys.stdout)
    if args.csv:
        with args.csv.open("w", encoding="utf-8", newline="") as fh:
            write_stat_csv(result, fh)
    if args.transcripts:
        with args.transcripts.open("w", encoding="utf-8", newline="") as fh:
            turns = write_transcripts_csv(iter_transcripts(config, range(config.trials)), fh)
        logger.info("Wrote %d turns to %s", turns, args.transcripts)
    return EXIT_OK


# ---------------------------------------------------------------------------
# sweep / params / codec-roundtrip
# ---------------------------------------------------------------------------


def _grid_from_flags(args: argparse.Namespace) -> list[GridCell]:
    if not (args.ns and args.guessers and args.dealers):
        raise ValueError("sweep needs --grid or at least one each of --n, --guesser, --dealer")
    ms: list[int | None] = list(args.ms) or [None]
    return [
        GridCell.model_validate(
            {"n": n, "m": m, "guesser": guesser, "dealer": dealer, "delta": args.delta}
        )
        for n, m, guesser, dealer in itertools.product(args.ns, ms, args.guessers, args.dealers)
    ]


def _sweep(args: argparse.Namespace) -> int:
    cells = load_grid(args.grid) if args.grid else _grid_from_flags(args)
    rows = sweep(cells, args.trials, master_seed=args.seed, workers=max(1, args.workers))
    if args.out:
        with args.out.open("w", encoding="utf-8", newline="") as fh:
            write_sweep_csv(rows, fh)
    else:
        write_sweep_csv(rows, sys.stdout)
    return EXIT_OK


def _params(args: argparse.Namespace) -> int:
    summary = schedule_summary(DealerKind(args.dealer), args.n, args.m)
    epochs = summary.pop("epochs")
    sys.stdout.write(" ".join(f"{key}={value}" for key, value in summary.items()) + "\n")
    for i, epoch in enumerate(epochs, start=1):
        sys.stdout.write(f"epoch {i}: k={epoch['k']} ell={epoch['ell']} u={epoch['u']}\n")
    if not epochs:
        sys.stdout.write("no epochs at this n\n")
    return EXIT_OK


def _codec_roundtrip(args: argparse.Namespace) -> int:
    result = roundtrip_campaign(
        CodecKind(args.codec),
        args.n,
        args.k,
        args.alpha,
        args.trials,
        seed=args.seed,
        ell=args.ell,
        epoch=args.epoch,
    )
    sys.stdout.write(
        f"{result.codec.value}: {result.passed}/{result.trials} round trips, "
        f"{result.indicator_ones} compressed codewords, "
        f"{result.length_mismatches} length mismatches\n"
    )
    for beta in sorted(result.compressed):
        sys.stdout.write(f"  >= {beta} bits below entropy: {result.compression_rate(beta):.4f}\n")
    return EXIT_OK if result.failed == 0 else EXIT_USAGE


_COMMANDS = {
    "simulate": _simulate,
    "sweep": _sweep,
    "params": _params,
    "codec-roundtrip": _codec_roundtrip,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "simulate" and args.shrink and args.m is None:
        parser.error("--shrink needs --m")
    level = {0: "WARNING", 1: "INFO"}.get(args.verbose, "DEBUG")
    settings.configure_logging(level)
    try:
        return _COMMANDS[args.command](args)
    except Infeasible as exc:
        sys.stderr.write(f"infeasible: {exc.reason} (n={exc.n}, m={exc.m})\n")
        return EXIT_CONFIG
    except ValidationError as exc:
        first = exc.errors()[0]
        field = ".".join(str(part) for part in first["loc"])
        sys.stderr.write(f"invalid configuration: {field}: {first['msg']}\n")
        return EXIT_CONFIG
    except (CardLabError, ValueError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CONFIG
