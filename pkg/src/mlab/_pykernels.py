"""Pure numpy fiber-sum kernels.

These are the reference implementations. They accept float64 arrays and
object arrays of ``Fraction`` alike, so exact mode runs through here.

Shapes: ``ma``/``da`` are ``(N1, N1)`` averaging (or difference) matrices on the
first factor, ``mb``/``db`` are ``(N2, N2)`` on the second, and variables are
``(N1, N2)``.
"""
from __future__ import annotations

import numpy as np


def _einsum(spec, *ops):
    if any(op.dtype == object for op in ops):
        return np.einsum(spec, *ops, optimize=False)
    return np.einsum(spec, *ops, optimize=True)


def mixed_square(ma, m, v, w):
    """``out[i, j] = sum_ab ma[i,a] ma[i,b] (sum_s m[j,s] v[a,s] w[b,s])**2``."""
    c = _einsum("as,js,bs->abj", v, m, w)
    return _einsum("ia,ib,abj->ij", ma, ma, c * c)


def quartic_fiber(ma, da, mb_out, mb_in, x, z):
    """``sum_j' mb_out[j,j'] sum_st mb_in[j',s] mb_in[j',t] Q[i,s,t]``.

    ``Q[i,s,t] = sum_a ma[i,a] PX[a,s,t] PZ[a,s,t]`` with
    ``PX[a,s,t] = sum_b da[a,b] x[b,s] x[b,t]`` and likewise ``PZ``.
    """
    px = _einsum("ab,bs,bt->ast", da, x, x)
    pz = px if z is x else _einsum("ab,bs,bt->ast", da, z, z)
    q = _einsum("ia,ast->ist", ma, px * pz)
    r = _einsum("ks,kt,ist->ik", mb_in, mb_in, q)
    return r @ mb_out.T


def alpha_fiber(ma, mb, db, x, y, z):
    """Fiber form of ``alpha``: ``sum ma[i,a] ma[i,b] mb[j,j'] DY[a,j'] DXZ[a,b,j']``."""
    dy = y @ db.T
    dxz = _einsum("ks,bs,as->abk", db, x, z)
    r = _einsum("ia,ib,abk->ik", ma, ma, dy[:, None, :] * dxz)
    return r @ mb.T
