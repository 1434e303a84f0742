"""Process-level settings read from the environment."""
from __future__ import annotations

import logging
import os

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s %(message)s"

HOST = os.environ.get("HOST", "0.0.0.0")
PORT = int(os.environ.get("PORT", "3001"))
LOG_LEVEL = os.environ.get("LOG_LEVEL", "INFO").upper()
WORKERS = max(1, int(os.environ.get("CARD_LAB_WORKERS", "1")))
CACHE_TTL = float(os.environ.get("CARD_LAB_CACHE_TTL", "600"))


def configure_logging(level: str | None = None) -> None:
    name = (level or LOG_LEVEL).upper()
    logging.basicConfig(level=getattr(logging, name, logging.INFO), format=LOG_FORMAT)
