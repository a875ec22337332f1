"""Runtime configuration.

PIPEDYN_THREADS caps parallel grid evaluation; it may come from the process
environment or a .env file loaded by the CLI.  Nothing else is read from the
environment.
"""

from __future__ import annotations

import logging
import os

logger = logging.getLogger(__name__)

THREADS_VAR = "PIPEDYN_THREADS"
DEFAULT_THREADS = 4


def thread_cap() -> int:
    raw = os.environ.get(THREADS_VAR)
    if raw is None:
        return min(DEFAULT_THREADS, os.cpu_count() or 1)
    try:
        value = int(raw)
    except ValueError:
        logger.warning("ignoring non-integer %s=%r", THREADS_VAR, raw)
        return 1
    return max(1, value)
