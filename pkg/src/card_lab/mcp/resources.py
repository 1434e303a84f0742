from __future__ import annotations

import json

from mcp.server.fastmcp import FastMCP

from card_lab.domain.hashing import MAX_TABLE_DEGREE, REDUCTION_POLYNOMIALS


def polynomial_table() -> dict[str, object]:
    return {
        "max_table_degree": MAX_TABLE_DEGREE,
        "polynomials": {str(ell): hex(poly) for ell, poly in REDUCTION_POLYNOMIALS.items()},
    }


def register_resources(mcp: FastMCP) -> None:
    """Register the static lab resources. Called once during server setup."""

    @mcp.resource("lab://card-lab/reduction-polynomials", mime_type="application/json")
    def reduction_polynomials() -> str:
        """Primitive reduction polynomial used for GF(2^ell), per ell, as hex."""
        return json.dumps(polynomial_table())
