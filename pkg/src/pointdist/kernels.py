"""Kernel selection: the compiled extension when importable, numpy otherwise.

Set ``POINTDIST_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("POINTDIST_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled  # type: ignore[attr-defined]
    except ImportError:
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"

eval_terms = _impl.eval_terms
eval_poly = _impl.eval_poly
radial_panel_sums = _impl.radial_panel_sums

__all__ = ["BACKEND", "eval_terms", "eval_poly", "radial_panel_sums"]
