"""Kernel dispatch: compiled extension if importable, numpy otherwise.

Set ``NULLPROJ_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import kernels_py

BACKEND = "python"
if not os.environ.get("NULLPROJ_PURE_PYTHON"):
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = kernels_py
    else:
        BACKEND = "cython"
else:
    _impl = kernels_py

rip_extremes = _impl.rip_extremes
l0_search = _impl.l0_search
