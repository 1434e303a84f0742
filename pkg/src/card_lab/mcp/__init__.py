from __future__ import annotations

from mcp.server.fastmcp import FastMCP

from card_lab import settings
from card_lab.application.experiment_service import ExperimentService
from card_lab.domain.entities import StatResult
from card_lab.infrastructure.cache import TTLCache
from card_lab.mcp.resources import register_resources
from card_lab.mcp.tools import register_tools


def create_mcp_app() -> FastMCP:
    """Create and configure the FastMCP application with all services wired."""
    cache: TTLCache[StatResult] = TTLCache(default_ttl=settings.CACHE_TTL)
    experiment_svc = ExperimentService(cache, workers=settings.WORKERS)

    mcp = FastMCP("Card Lab MCP", stateless_http=True)
    register_tools(mcp, experiment_svc)
    register_resources(mcp)
    return mcp
