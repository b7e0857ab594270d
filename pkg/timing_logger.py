import time
import logging
from contextlib import contextmanager

# Captured at import time; import this module first in main.py for accurate elapsed times.
PROGRAM_START = time.perf_counter()


@contextmanager
def log(label: str, sink: dict = None):
    """
    Context manager that times any block and logs a [TIMING] line at DEBUG level.

    Log format (grep-able):
        [TIMING] <label> | duration=X.XXXs | elapsed=X.XXXs

    When `sink` is given, the duration is also stored as sink[label] (accumulated
    if the label repeats), which is how run reports collect per-stage wall clock.

    Usage:
        from timing_logger import log as tlog

        with tlog("globalize.stage_3", sink=report.stage_seconds):
            t = scattered_step(...)
    """
    t0 = time.perf_counter()
    try:
        yield
    finally:
        duration = time.perf_counter() - t0
        elapsed = time.perf_counter() - PROGRAM_START
        if sink is not None:
            sink[label] = sink.get(label, 0.0) + duration
        logging.debug(f"[TIMING] {label} | duration={duration:.3f}s | elapsed={elapsed:.3f}s")
