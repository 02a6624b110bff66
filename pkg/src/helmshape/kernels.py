"""Backend selection for the pairwise Hankel kernels.

The compiled extension is used when it was built; ``HELMSHAPE_PURE=1`` forces
the numpy fallback.
"""
import os

from . import _kernels_py

BACKEND = "python"
hankel_pairs = _kernels_py.hankel_pairs

if os.environ.get("HELMSHAPE_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:
        pass
    else:
        hankel_pairs = _compiled.hankel_pairs
        BACKEND = "cython"

__all__ = ["hankel_pairs", "BACKEND"]
