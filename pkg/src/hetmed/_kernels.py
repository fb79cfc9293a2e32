"""Kernel backend selection.

The compiled extension is used when it was built; otherwise, or when
``HETMED_PURE_PYTHON=1`` is set, the NumPy versions are used.
"""

import os

from . import _pykernels

BACKEND = "python"
if os.environ.get("HETMED_PURE_PYTHON") != "1":
    try:
        from . import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
else:
    _impl = _pykernels

simex_moments = _impl.simex_moments
best_split = _impl.best_split

__all__ = ["BACKEND", "best_split", "simex_moments"]
