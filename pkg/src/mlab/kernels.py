"""Backend selection for the fiber-sum kernels.

The compiled module is used when it imported and every operand is float;
object (exact) arrays always go through numpy. Set ``MLAB_PURE_PYTHON=1`` to
force the numpy path everywhere.
"""
from __future__ import annotations

import os

import numpy as np

from . import _pykernels

try:
    if os.environ.get("MLAB_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure python requested")
    from . import _ckernels
except ImportError:
    _ckernels = None

BACKEND = "cython" if _ckernels is not None else "python"


def _pick(ops):
    if _ckernels is None or any(np.asarray(o).dtype == object for o in ops):
        return _pykernels, ops
    return _ckernels, [np.ascontiguousarray(o, dtype=np.float64) for o in ops]


def mixed_square(ma, m, v, w):
    mod, ops = _pick([ma, m, v, w])
    return mod.mixed_square(*ops)


def quartic_fiber(ma, da, mb_out, mb_in, x, z):
    mod, ops = _pick([ma, da, mb_out, mb_in, x, z])
    return mod.quartic_fiber(*ops)


def alpha_fiber(ma, mb, db, x, y, z):
    mod, ops = _pick([ma, mb, db, x, y, z])
    return mod.alpha_fiber(*ops)
