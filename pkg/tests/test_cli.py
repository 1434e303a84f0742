"""Tests for the card-lab command line."""
from __future__ import annotations

import csv
import io
from pathlib import Path

import pytest

from card_lab.cli import EXIT_CONFIG, EXIT_OK, EXIT_USAGE, format_stats, main
from card_lab.domain.entities import StatResult


def run(capsys: pytest.CaptureFixture[str], *argv: str) -> tuple[int, str, str]:
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# ---------------------------------------------------------------------------
# usage errors
# ---------------------------------------------------------------------------

def test_missing_command_is_a_usage_error() -> None:
    with pytest.raises(SystemExit) as info:
        main([])
    assert info.value.code == EXIT_USAGE


def test_unknown_guesser_is_a_usage_error() -> None:
    with pytest.raises(SystemExit) as info:
        main(["simulate", "--guesser", "psychic", "--dealer", "shuffle", "--n", "8"])
    assert info.value.code == EXIT_USAGE


def test_domain_and_shrink_are_exclusive() -> None:
    argv = ["simulate", "--guesser", "perfect", "--dealer", "shuffle", "--n", "8"]
    with pytest.raises(SystemExit) as info:
        main([*argv, "--domain", "4", "--shrink"])
    assert info.value.code == EXIT_USAGE


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def test_simulate_memoryless(capsys: pytest.CaptureFixture[str]) -> None:
    code, out, _ = run(
        capsys, "simulate", "--guesser", "memoryless", "--dealer", "shuffle", "--n", "16",
        "--trials", "20",
    )
    assert code == EXIT_OK
    assert "trials           20" in out
    assert "mean_correct     1.0000 ± 0.0000" in out


def test_simulate_writes_csv_and_transcripts(
    capsys: pytest.CaptureFixture[str], tmp_path: Path
) -> None:
    stats, turns = tmp_path / "stats.csv", tmp_path / "turns.csv"
    code, _, _ = run(
        capsys, "simulate", "--guesser", "perfect", "--dealer", "static", "--pattern", "reverse",
        "--n", "8", "--trials", "3", "--csv", str(stats), "--transcripts", str(turns),
    )
    assert code == EXIT_OK
    assert stats.read_text(encoding="utf-8").splitlines()[1].startswith("all,3,")
    rows = list(csv.reader(io.StringIO(turns.read_text(encoding="utf-8"))))
    assert len(rows) == 1 + 3 * 8
    # the reverse pattern draws 8 first
    assert rows[1][3] == "8"


def test_simulate_arrangement_file(capsys: pytest.CaptureFixture[str], tmp_path: Path) -> None:
    path = tmp_path / "order.txt"
    path.write_text("4 3 2 1\n", encoding="utf-8")
    code, out, _ = run(
        capsys, "simulate", "--guesser", "memoryless", "--card", "4", "--dealer", "static",
        "--arrangement-file", str(path), "--n", "4", "--trials", "2",
    )
    assert code == EXIT_OK
    assert "mean_reasonable  1.0000" in out


def test_simulate_shrink_needs_m_is_a_usage_error(capsys: pytest.CaptureFixture[str]) -> None:
    with pytest.raises(SystemExit) as info:
        main(["simulate", "--guesser", "following", "--dealer", "shuffle", "--n", "64", "--shrink"])
    assert info.value.code == EXIT_USAGE
    assert "--shrink needs --m" in capsys.readouterr().err


def test_simulate_shrink(capsys: pytest.CaptureFixture[str]) -> None:
    code, _, _ = run(
        capsys, "simulate", "--guesser", "following", "--dealer", "shuffle", "--n", "64",
        "--m", "25", "--shrink", "--strict-memory", "--trials", "5",
    )
    assert code == EXIT_OK


def test_simulate_infeasible(capsys: pytest.CaptureFixture[str]) -> None:
    code, _, err = run(
        capsys, "simulate", "--guesser", "perfect", "--dealer", "mtbe", "--n", "65536",
        "--m", "16", "--trials", "1",
    )
    assert code == EXIT_CONFIG
    assert err.startswith("infeasible:")


def test_simulate_invalid_configuration(capsys: pytest.CaptureFixture[str]) -> None:
    code, _, err = run(
        capsys, "simulate", "--guesser", "subset", "--dealer", "shuffle", "--n", "16",
    )
    assert code == EXIT_CONFIG
    assert "invalid configuration" in err


def test_simulate_memory_violation(capsys: pytest.CaptureFixture[str]) -> None:
    code, _, err = run(
        capsys, "simulate", "--guesser", "perfect", "--dealer", "shuffle", "--n", "16",
        "--m", "8", "--strict-memory", "--trials", "1",
    )
    assert code == EXIT_CONFIG
    assert "budget is 8" in err


def test_format_stats_with_epochs() -> None:
    result = StatResult(
        trials=4,
        mean_correct=2.0,
        stderr_correct=0.5,
        mean_reasonable=3.0,
        stderr_reasonable=0.25,
        epoch_reasonable=(1.0,),
        epoch_reasonable_stderr=(0.1,),
        epoch_correct=(0.5,),
        epoch_correct_stderr=(0.2,),
        epoch_phase_correct=0.5,
        epoch_phase_correct_stderr=0.2,
    )
    out = io.StringIO()
    format_stats(result, out)
    text = out.getvalue()
    assert "epoch  reasonable" in text
    assert "epoch phase correct 0.5000 ± 0.2000" in text


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

def test_sweep_from_flags_to_stdout(capsys: pytest.CaptureFixture[str]) -> None:
    code, out, _ = run(
        capsys, "sweep", "--n", "8", "--n", "16", "--guesser", "memoryless",
        "--dealer", "shuffle", "--trials", "5",
    )
    assert code == EXIT_OK
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0][0] == "guesser"
    assert [row[2] for row in rows[1:]] == ["8", "16"]


def test_sweep_from_grid_file(capsys: pytest.CaptureFixture[str], tmp_path: Path) -> None:
    grid = tmp_path / "grid.jsonl"
    grid.write_text(
        '{"n": 16, "guesser": "perfect", "dealer": "shuffle"}\n'
        '{"n": 65536, "m": 16, "guesser": "perfect", "dealer": "mtbe"}\n',
        encoding="utf-8",
    )
    out_path = tmp_path / "sweep.csv"
    code, _, _ = run(
        capsys, "sweep", "--grid", str(grid), "--out", str(out_path), "--trials", "4"
    )
    assert code == EXIT_OK
    rows = list(csv.reader(io.StringIO(out_path.read_text(encoding="utf-8"))))
    assert len(rows) == 3
    assert rows[2][-1] == "infeasible"


def test_sweep_needs_cells(capsys: pytest.CaptureFixture[str]) -> None:
    code, _, err = run(capsys, "sweep", "--n", "16")
    assert code == EXIT_CONFIG
    assert "sweep needs" in err


def test_sweep_missing_grid_file(capsys: pytest.CaptureFixture[str], tmp_path: Path) -> None:
    code, _, err = run(capsys, "sweep", "--grid", str(tmp_path / "missing.jsonl"))
    assert code == EXIT_CONFIG
    assert err.startswith("error:")


# ---------------------------------------------------------------------------
# params / codec-roundtrip
# ---------------------------------------------------------------------------

def test_params_mtbe(capsys: pytest.CaptureFixture[str]) -> None:
    code, out, _ = run(capsys, "params", "--dealer", "mtbe", "--n", "1048576", "--m", "16")
    assert code == EXIT_OK
    first = out.splitlines()[0]
    for field in ("k1=2410", "ell=320", "d=5", "final_cutoff=640"):
        assert field in first
    assert "epoch 5: k=1130 ell=320 u=320" in out


def test_params_universal_without_epochs(capsys: pytest.CaptureFixture[str]) -> None:
    code, out, _ = run(capsys, "params", "--dealer", "universal", "--n", "1048576")
    assert code == EXIT_OK
    assert "no epochs at this n" in out


def test_params_infeasible(capsys: pytest.CaptureFixture[str]) -> None:
    code, _, _ = run(capsys, "params", "--dealer", "mtbe", "--n", "65536", "--m", "16")
    assert code == EXIT_CONFIG


def test_codec_roundtrip(capsys: pytest.CaptureFixture[str]) -> None:
    code, out, _ = run(
        capsys, "codec-roundtrip", "--codec", "unordered", "--n", "16", "--k", "6",
        "--alpha", "1", "--trials", "10",
    )
    assert code == EXIT_OK
    assert out.startswith("unordered: 10/10 round trips")
