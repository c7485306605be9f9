#!/usr/bin/env python3

import logging
from typing import Optional

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
PACKAGES = ("lattice", "k3", "blocks", "toric", "cli", "utils")


def configure_logging(level: Optional[str] = None) -> None:
    """Attach one stream handler to each library logger at the given level"""
    from utils.settings import get_settings

    level_name = (level or get_settings().log_level).upper()
    numeric = getattr(logging, level_name, None)
    if not isinstance(numeric, int):
        raise ValueError(f"Unknown log level: {level_name}")

    handler = logging.StreamHandler()
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    for name in PACKAGES:
        logger = logging.getLogger(name)
        logger.handlers = [handler]
        logger.setLevel(numeric)
        logger.propagate = False
