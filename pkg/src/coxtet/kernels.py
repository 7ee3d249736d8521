"""Select the compiled kernels when available, else the numpy fallback.

Set COXTET_PURE_PYTHON=1 to force the fallback.
"""

from __future__ import annotations

import os

from . import _kernels_py

BACKEND = "python"
expand_level = _kernels_py.expand_level
triangle_pairs = _kernels_py.triangle_pairs

if os.environ.get("COXTET_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        _compiled = None
    if _compiled is not None:
        BACKEND = "cython"
        expand_level = _compiled.expand_level
        triangle_pairs = _compiled.triangle_pairs

__all__ = ["BACKEND", "expand_level", "triangle_pairs"]
