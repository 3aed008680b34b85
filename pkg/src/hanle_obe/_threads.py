"""BLAS thread capping for the tiny dense problems this package solves.

Every matrix here is at most a few hundred rows, where multithreaded BLAS
kernels lose badly to a single core (thread startup and synchronization
dominate).  Compute entry points wrap themselves in :func:`limited_blas`;
the cap is process-wide and reference-counted, so nested or concurrent
callers (e.g. scan worker threads) share one limit switch.
"""

from __future__ import annotations

import threading
from contextlib import contextmanager

try:
    from threadpoolctl import threadpool_limits
except ImportError:  # pragma: no cover - threadpoolctl ships with scipy
    threadpool_limits = None

_lock = threading.Lock()
_depth = 0
_controller = None


@contextmanager
def limited_blas():
    global _depth, _controller
    if threadpool_limits is None:
        yield
        return
    with _lock:
        _depth += 1
        if _depth == 1:
            _controller = threadpool_limits(limits=1, user_api="blas")
    try:
        yield
    finally:
        with _lock:
            _depth -= 1
            if _depth == 0 and _controller is not None:
                _controller.restore_original_limits()
                _controller = None
