"""Select the compiled kernels when available, else the pure-Python ones.

Set ``RELAYOPT_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _kernels_py

CONVERGED = _kernels_py.CONVERGED
MAX_ITER = _kernels_py.MAX_ITER
DEAD = _kernels_py.DEAD

_impl = _kernels_py
BACKEND = "python"
if not os.environ.get("RELAYOPT_PURE_PYTHON"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py

stream_objective = _impl.stream_objective
total_objective = _impl.total_objective
waterfill = _impl.waterfill
alternate = _impl.alternate

__all__ = [
    "BACKEND",
    "CONVERGED",
    "DEAD",
    "MAX_ITER",
    "alternate",
    "stream_objective",
    "total_objective",
    "waterfill",
]
