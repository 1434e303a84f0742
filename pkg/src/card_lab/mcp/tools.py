from __future__ import annotations

import asyncio
import dataclasses
import json
import logging
from typing import Any

from mcp import types
from mcp.server.fastmcp import FastMCP
from pydantic import ValidationError

from card_lab.application.codec_service import roundtrip_campaign
from card_lab.application.config import GridCell
from card_lab.application.experiment_service import ExperimentService
from card_lab.application.registry import schedule_summary
from card_lab.application.theory import theory_curve
from card_lab.domain.exceptions import CardLabError, Infeasible
from card_lab.domain.value_objects import CodecKind, DealerKind

logger = logging.getLogger(__name__)

_RESULT_URI = "mcp://card-lab/result"

MAX_TOOL_TRIALS = 100_000


def _as_resource(json_str: str) -> list[types.EmbeddedResource]:
    """Wrap a JSON string as an embedded resource so the LLM does not narrate it."""
    return [
        types.EmbeddedResource(
            type="resource",
            resource=types.TextResourceContents(
                uri=_RESULT_URI,  # type: ignore[arg-type]
                mimeType="application/json",
                text=json_str,
            ),
        )
    ]


def _error_json(message: str, **extra: Any) -> str:
    return json.dumps({"error": message, **extra}, ensure_ascii=False)


def _handle_exception(exc: Exception) -> list[types.EmbeddedResource]:
    if isinstance(exc, Infeasible):
        return _as_resource(_error_json("infeasible", n=exc.n, m=exc.m, reason=exc.reason))
    if isinstance(exc, ValidationError):
        first = exc.errors()[0]
        field = ".".join(str(part) for part in first["loc"])
        return _as_resource(_error_json(f"Invalid parameter {field}: {first['msg']}"))
    if isinstance(exc, (CardLabError, ValueError)):
        return _as_resource(_error_json(str(exc)))
    logger.exception("Unexpected error in MCP tool: %s", exc)
    return _as_resource(_error_json("An unexpected error occurred."))


def _check_trials(trials: int) -> None:
    if not 1 <= trials <= MAX_TOOL_TRIALS:
        raise ValueError(f"trials must lie in 1..{MAX_TOOL_TRIALS}")


def register_tools(mcp: FastMCP, experiment_svc: ExperimentService) -> None:
    """Bind all @mcp.tool decorators. Called once during server setup."""

    @mcp.tool()
    async def simulate(
        guesser: str,
        dealer: str,
        n: int,
        trials: int = 100,
        seed: int = 0,
        m: int | None = None,
        delta: float | None = None,
        k: int | None = None,
        card: int = 1,
    ) -> list[types.EmbeddedResource]:
        """Play repeated guessing games and report mean correct and reasonable guesses.

        Args:
            guesser: One of memoryless, perfect, subset, power_sum, combined,
                     following, randomized, amplified.
            dealer: One of shuffle, static, static-adversarial, mtbe, mtbe-minorder,
                    universal. ``static`` uses a seeded random arrangement.
            n: Number of cards (a power of two for the hashing guessers).
            trials: Independent games to play (default 100).
            seed: Master seed; equal seeds give equal results.
            m: Subset size or memory budget, depending on guesser and dealer.
            delta: Range growth (following) or failure rate (amplified).
            k: Power-sum count (power_sum) or hash independence (amplified).
            card: The fixed guess of the memoryless guesser.
        """
        try:
            _check_trials(trials)
            cell = GridCell.model_validate(
                {
                    "n": n,
                    "guesser": guesser,
                    "dealer": dealer,
                    "m": m,
                    "delta": delta,
                    "k": k,
                    "card": card,
                }
            )
            config = cell.experiment(trials, master_seed=seed)
            result = await asyncio.to_thread(experiment_svc.simulate, config)
            payload = {"config": json.loads(config.model_dump_json()), **dataclasses.asdict(result)}
            return _as_resource(json.dumps(payload, ensure_ascii=False))
        except Exception as exc:
            return _handle_exception(exc)

    @mcp.tool()
    async def schedule_params(
        dealer: str,
        n: int,
        m: int | None = None,
    ) -> list[types.EmbeddedResource]:
        """Get the epoch schedule an adaptive dealer would use.

        Args:
            dealer: mtbe, mtbe-minorder or universal.
            n: Number of cards.
            m: Guesser memory budget in bits (mtbe dealers only).
        """
        try:
            summary = schedule_summary(DealerKind(dealer), n, m)
            return _as_resource(json.dumps(summary, ensure_ascii=False))
        except Exception as exc:
            return _handle_exception(exc)

    @mcp.tool()
    async def codec_roundtrip(
        codec: str,
        n: int,
        k: int,
        alpha: int,
        trials: int = 100,
        seed: int = 0,
    ) -> list[types.EmbeddedResource]:
        """Encode and decode random instances with a compression codec and tally the outcome.

        Args:
            codec: ordered (last k cards of an arrangement) or unordered
                   (reserved set of a min-order dealer).
            n: Number of cards.
            k: Suffix length (ordered) or reserved-set size (unordered).
            alpha: Number of correct guesses the codeword relies on.
            trials: Random instances to round-trip (default 100).
            seed: Master seed.
        """
        try:
            _check_trials(trials)
            result = await asyncio.to_thread(
                roundtrip_campaign, CodecKind(codec), n, k, alpha, trials, seed
            )
            payload = {
                "codec": result.codec.value,
                "n": n,
                "k": k,
                "alpha": alpha,
                "trials": result.trials,
                "passed": result.passed,
                "failed": result.failed,
                "length_mismatches": result.length_mismatches,
                "indicator_ones": result.indicator_ones,
                "entropy_bits": result.entropy_bits,
                "lengths": {str(length): count for length, count in sorted(result.lengths.items())},
            }
            return _as_resource(json.dumps(payload, ensure_ascii=False))
        except Exception as exc:
            return _handle_exception(exc)

    @mcp.tool()
    async def theory_value(
        name: str,
        n: int | None = None,
        m: int | None = None,
        delta: float | None = None,
        k: int | None = None,
    ) -> list[types.EmbeddedResource]:
        """Evaluate a closed-form expected-score curve.

        Args:
            name: Curve name, e.g. half_log, subset, adaptive_bound, harmonic.
            n: Number of cards.
            m: Subset size or memory budget.
            delta: Range growth or failure rate.
            k: Power-sum count.
        """
        try:
            supplied = {"n": n, "m": m, "delta": delta, "k": k}
            params = {key: value for key, value in supplied.items() if value is not None}
            value = theory_curve(name, params)
            return _as_resource(json.dumps({"name": name, "params": params, "value": value}))
        except Exception as exc:
            return _handle_exception(exc)
