"""Parsers for sweep grid files and static arrangement files.

Grid file grammar, one cell per line::

    # comment
    {"n": 1024, "guesser": "following", "dealer": "shuffle", "delta": 1.0}
    {"n": 1048576, "m": 16, "guesser": "subset", "dealer": "mtbe", "trials": 200}

Blank lines and lines starting with ``#`` are skipped. Every other line is a
JSON object validated as a ``GridCell``.

Arrangement files hold one permutation per line, cards separated by commas
or whitespace.
"""
from __future__ import annotations

import json
import logging
import re
from collections.abc import Iterable
from pathlib import Path

from pydantic import ValidationError

from card_lab.application.config import GridCell
from card_lab.domain.dealers import validate_arrangement
from card_lab.domain.exceptions import InvalidArrangement, ParamError

logger = logging.getLogger(__name__)

_SEPARATORS = re.compile(r"[,\s]+")


def _content_lines(lines: Iterable[str]) -> Iterable[tuple[int, str]]:
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if line and not line.startswith("#"):
            yield lineno, line


def parse_grid(lines: Iterable[str]) -> list[GridCell]:
    cells = []
    for lineno, line in _content_lines(lines):
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParamError(f"Grid line {lineno}: not valid JSON ({exc.msg})") from exc
        if not isinstance(record, dict):
            raise ParamError(f"Grid line {lineno}: expected a JSON object")
        try:
            cells.append(GridCell.model_validate(record))
        except ValidationError as exc:
            raise ParamError(f"Grid line {lineno}: {exc.errors()[0]['msg']}") from exc
    if not cells:
        raise ParamError("Grid is empty")
    logger.debug("Parsed %d grid cells", len(cells))
    return cells


def load_grid(path: Path) -> list[GridCell]:
    with path.open(encoding="utf-8") as fh:
        return parse_grid(fh)


def parse_arrangements(lines: Iterable[str]) -> list[tuple[int, ...]]:
    arrangements = []
    for lineno, line in _content_lines(lines):
        try:
            cards = [int(token) for token in _SEPARATORS.split(line) if token]
        except ValueError as exc:
            raise InvalidArrangement(f"Arrangement line {lineno}: {exc}") from exc
        arrangements.append(validate_arrangement(cards))
    return arrangements


def load_arrangement(path: Path, n: int) -> tuple[int, ...]:
    """First permutation in the file; it must cover exactly 1..n."""
    with path.open(encoding="utf-8") as fh:
        arrangements = parse_arrangements(fh)
    if not arrangements:
        raise InvalidArrangement(f"No arrangement in {path}")
    return validate_arrangement(arrangements[0], n)
