"""Tests for MCP tool functions: input validation, success and error paths."""
from __future__ import annotations

import json
from unittest.mock import MagicMock

from card_lab.application.config import ExperimentConfig
from card_lab.application.experiment_service import ExperimentService
from card_lab.domain.entities import StatResult
from card_lab.domain.exceptions import Infeasible
from card_lab.mcp.resources import polynomial_table, register_resources
from card_lab.mcp.tools import MAX_TOOL_TRIALS, register_tools


def make_result() -> StatResult:
    return StatResult(
        trials=10,
        mean_correct=5.0,
        stderr_correct=0.25,
        mean_reasonable=9.0,
        stderr_reasonable=0.5,
    )


def make_service(**kwargs: object) -> MagicMock:
    svc = MagicMock(spec=ExperimentService)
    svc.simulate = MagicMock(**kwargs) if kwargs else MagicMock(return_value=make_result())
    return svc


class MockMcp:
    """Captures what register_tools and register_resources bind."""

    def __init__(self) -> None:
        self.tools: dict = {}  # type: ignore[type-arg]
        self.resources: dict = {}  # type: ignore[type-arg]

    def tool(self, meta: dict | None = None):  # type: ignore[type-arg]
        def decorator(fn):  # type: ignore[type-arg]
            self.tools[fn.__name__] = fn
            return fn
        return decorator

    def resource(self, uri: str, *args, **kwargs):  # type: ignore[type-arg]
        def decorator(fn):  # type: ignore[type-arg]
            self.resources[uri] = fn
            return fn
        return decorator


def build_tool_functions(experiment_svc: MagicMock) -> dict:  # type: ignore[type-arg]
    mock_mcp = MockMcp()
    register_tools(mock_mcp, experiment_svc)  # type: ignore[arg-type]
    return mock_mcp.tools


def parse(result: list) -> dict:  # type: ignore[type-arg]
    return json.loads(result[0].resource.text)  # type: ignore[no-any-return]


# ---------------------------------------------------------------------------
# simulate tool
# ---------------------------------------------------------------------------

async def test_simulate_returns_resource() -> None:
    svc = make_service()
    tools = build_tool_functions(svc)

    result = await tools["simulate"]("following", "shuffle", 1024, trials=10, seed=3)

    parsed = parse(result)
    assert parsed["mean_correct"] == 5.0
    assert parsed["config"]["n"] == 1024
    assert parsed["config"]["master_seed"] == 3
    assert parsed["config"]["guesser"]["kind"] == "following"
    config = svc.simulate.call_args.args[0]
    assert isinstance(config, ExperimentConfig)
    assert config.trials == 10


async def test_simulate_unknown_guesser_returns_error() -> None:
    svc = make_service()
    tools = build_tool_functions(svc)

    parsed = parse(await tools["simulate"]("psychic", "shuffle", 16))
    assert "error" in parsed
    assert "guesser" in parsed["error"]
    svc.simulate.assert_not_called()


async def test_simulate_missing_parameter_returns_error() -> None:
    tools = build_tool_functions(make_service())

    parsed = parse(await tools["simulate"]("subset", "shuffle", 16))
    assert "error" in parsed


async def test_simulate_trials_bound() -> None:
    tools = build_tool_functions(make_service())

    parsed = parse(await tools["simulate"]("perfect", "shuffle", 16, trials=MAX_TOOL_TRIALS + 1))
    assert "trials" in parsed["error"]


async def test_simulate_infeasible_is_structured() -> None:
    svc = make_service(side_effect=Infeasible(2**16, 16, "no epoch above the final cutoff"))
    tools = build_tool_functions(svc)

    parsed = parse(await tools["simulate"]("perfect", "mtbe", 2**16, m=16))
    assert parsed == {
        "error": "infeasible",
        "n": 2**16,
        "m": 16,
        "reason": "no epoch above the final cutoff",
    }


async def test_tool_service_exception_returns_resource_not_exception() -> None:
    """Exception from service must NOT propagate; the tool returns an error resource."""
    tools = build_tool_functions(make_service(side_effect=RuntimeError("boom")))

    result = await tools["simulate"]("perfect", "shuffle", 16)

    assert isinstance(result, list)
    parsed = parse(result)
    assert parsed["error"] == "An unexpected error occurred."


# ---------------------------------------------------------------------------
# schedule_params / codec_roundtrip / theory_value tools
# ---------------------------------------------------------------------------

async def test_schedule_params() -> None:
    tools = build_tool_functions(make_service())

    parsed = parse(await tools["schedule_params"]("mtbe", 2**20, 16))
    assert parsed["k1"] == 2410
    assert parsed["ell"] == 320
    assert len(parsed["epochs"]) == 5


async def test_schedule_params_infeasible() -> None:
    tools = build_tool_functions(make_service())

    parsed = parse(await tools["schedule_params"]("mtbe", 2**16, 16))
    assert parsed["error"] == "infeasible"


async def test_schedule_params_unknown_dealer() -> None:
    tools = build_tool_functions(make_service())

    parsed = parse(await tools["schedule_params"]("croupier", 1024))
    assert "error" in parsed


async def test_codec_roundtrip() -> None:
    tools = build_tool_functions(make_service())

    parsed = parse(await tools["codec_roundtrip"]("ordered", 16, 4, 1, trials=5))
    assert parsed["trials"] == 5
    assert parsed["failed"] == 0
    assert parsed["length_mismatches"] == 0
    assert sum(parsed["lengths"].values()) == 5


async def test_codec_roundtrip_bad_codec() -> None:
    tools = build_tool_functions(make_service())

    parsed = parse(await tools["codec_roundtrip"]("zip", 16, 4, 1))
    assert "error" in parsed


async def test_theory_value() -> None:
    tools = build_tool_functions(make_service())

    parsed = parse(await tools["theory_value"]("half_log", n=1024))
    assert parsed == {"name": "half_log", "params": {"n": 1024}, "value": 5.0}


async def test_theory_value_unknown_curve() -> None:
    tools = build_tool_functions(make_service())

    parsed = parse(await tools["theory_value"]("golden_ratio", n=8))
    assert "Unknown theory curve" in parsed["error"]


# ---------------------------------------------------------------------------
# resources
# ---------------------------------------------------------------------------

def test_polynomial_resource() -> None:
    mock_mcp = MockMcp()
    register_resources(mock_mcp)  # type: ignore[arg-type]

    text = mock_mcp.resources["lab://card-lab/reduction-polynomials"]()
    parsed = json.loads(text)
    assert parsed == json.loads(json.dumps(polynomial_table()))
    assert parsed["polynomials"]["2"] == "0x7"
