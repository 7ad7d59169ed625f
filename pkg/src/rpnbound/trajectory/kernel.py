"""Selects the compiled trajectory kernel when available.

Set RPNBOUND_PURE_PYTHON=1 to force the reference implementation.
"""

import os

from . import _kernel_py

BACKEND = "python"
evolve = _kernel_py.evolve

if os.environ.get("RPNBOUND_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernel

        evolve = _kernel.evolve
        BACKEND = "cython"
    except ImportError:
        pass

__all__ = ["BACKEND", "evolve"]
