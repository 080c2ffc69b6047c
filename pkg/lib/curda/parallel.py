"""Worker-count policy shared by dataset generation and the experiment grid."""

from __future__ import annotations

import logging
import os

logger = logging.getLogger(__name__)

THREADS_ENV = "CDA_THREADS"


def worker_count(requested: int | None = None) -> int:
    """Number of workers to use, capped by the CDA_THREADS environment variable.

    Without a request and without the variable, work runs serially.
    """
    cap_text = os.environ.get(THREADS_ENV)
    cap: int | None = None
    if cap_text:
        try:
            cap = max(1, int(cap_text))
        except ValueError:
            logger.warning("Ignoring non-integer %s=%r", THREADS_ENV, cap_text)
    if requested is None:
        return cap or 1
    requested = max(1, requested)
    return min(requested, cap) if cap else requested
