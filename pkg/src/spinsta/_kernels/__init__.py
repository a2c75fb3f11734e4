"""Hot-loop kernels: compiled when available, numpy fallback otherwise.

Set ``SPINSTA_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _rk4_py

python_rk4_evolve = _rk4_py.rk4_evolve

try:
    if os.environ.get("SPINSTA_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-Python kernel requested")
    from ._rk4 import rk4_evolve as compiled_rk4_evolve
except ImportError:
    compiled_rk4_evolve = None

rk4_evolve = compiled_rk4_evolve or python_rk4_evolve
BACKEND = "cython" if compiled_rk4_evolve is not None else "python"

__all__ = ["rk4_evolve", "python_rk4_evolve", "compiled_rk4_evolve", "BACKEND"]
