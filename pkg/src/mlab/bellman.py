"""The control process beta_k and the quantities of its one-step drift bound.

Notation: ``MA_k``/``MB_k`` are the averaging matrices of ``A_k``/``B_k`` on the
two factors, ``DA_k = MA_{k+1} - MA_k`` and ``DB_k`` likewise. A variable on the
product is an ``(N1, N2)`` array, so ``MA_k @ W`` averages in the first
coordinate and ``W @ MB_k.T`` in the second.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import kernels
from .probspace import (
    ProbabilityError,
    ProductFiltrationPair,
    RandomVariable,
    _max_abs,
    block_average,
    encode_scalars,
    lp_norm,
)
from .transform import MartingaleInputs, dot_transform

TOL = 1e-10


def _vals(x) -> np.ndarray:
    return x.values if isinstance(x, RandomVariable) else np.asarray(x)


def _check_step(pair: ProductFiltrationPair, k: int, need_next: bool = True):
    top = pair.horizon - 1 if need_next else pair.horizon
    if not 0 <= k <= top:
        raise ProbabilityError(f"step {k} outside 0..{top}")


def _min(a):
    a = np.asarray(a)
    if a.dtype == object:
        return min(a.ravel())
    return float(a.min())


def _h_measurable(pair: ProductFiltrationPair, k: int, values, tol: float) -> bool:
    v = np.asarray(values)
    avg = block_average(v, pair.space.mass, pair.H(k))
    gap = _max_abs(avg - v)
    return gap == 0 if v.dtype == object else gap <= tol * max(1.0, float(_max_abs(v)))


# --------------------------------------------------------------------------
# the individual quantities
# --------------------------------------------------------------------------


def alpha_k(inputs: MartingaleInputs, k: int) -> RandomVariable:
    """``E((Y_{k+1}-Y_k)(E(X_k Z|G_{k+1}) - E(X_k Z|G_k)) | H_k)`` by partition averages."""
    pair = inputs.pair
    _check_step(pair, k)
    mass = pair.space.mass
    dy = inputs.Yp[k + 1] - inputs.Yp[k]
    xz = inputs.Xp[k] * inputs.Z.values
    dxz = block_average(xz, mass, pair.G(k + 1)) - block_average(xz, mass, pair.G(k))
    return pair.variable(block_average(dy * dxz, mass, pair.H(k)))


def alpha_k_fiber(inputs: MartingaleInputs, k: int) -> RandomVariable:
    """``alpha_k`` through its fiber form: a double ``A_k`` average of a ``B_k`` average
    of ``Delta Y(w1', .) * Delta[X(w1'', .) Z(w1', .)]``."""
    pair = inputs.pair
    _check_step(pair, k)
    db = pair.MB(k + 1) - pair.MB(k)
    out = kernels.alpha_fiber(
        pair.MA(k), pair.MB(k), db, inputs.X.values, inputs.Y.values, inputs.Z.values
    )
    return pair.variable(out)


def gamma_k(v, w, pair: ProductFiltrationPair, k: int) -> RandomVariable:
    """``E_{A_k}^{w1'} E_{A_k}^{w1''} (E_{B_k}^{w2'} V(w1', w2') W(w1'', w2'))^2``."""
    _check_step(pair, k, need_next=False)
    v, w = pair.coerce(_vals(v)), pair.coerce(_vals(w))
    return pair.variable(kernels.mixed_square(pair.MA(k), pair.MB(k), v, w))


def beta_k(inputs: MartingaleInputs, k: int) -> RandomVariable:
    """``1/2 E(Y_k^2|F_k) + 1/2 gamma(X,Z) + 1/4 gamma(X,X) + 1/4 gamma(Z,Z)``."""
    pair = inputs.pair
    _check_step(pair, k, need_next=False)
    X, Z = inputs.X.values, inputs.Z.values
    yk = inputs.Yp[k]
    ey = block_average(yk * yk, pair.space.mass, pair.F(k))
    gxz = gamma_k(X, Z, pair, k).values
    gxx = gamma_k(X, X, pair, k).values
    gzz = gamma_k(Z, Z, pair, k).values
    half, quarter = _consts(pair)
    return pair.variable(half * ey + half * gxz + quarter * gxx + quarter * gzz)


def _consts(pair: ProductFiltrationPair):
    if pair.exact:
        return Fraction(1, 2), Fraction(1, 4)
    return 0.5, 0.25


def delta_k(v, w, pair: ProductFiltrationPair, k: int, route: str = "conditional") -> RandomVariable:
    """``E(gamma_{k+1}(V,W) - gamma_k(V,W) | H_k)``.

    ``route="conditional"`` conditions on the ``H_k`` partition; ``route="fiber"``
    applies ``MA_k`` and ``MB_k`` to the difference, which is the expanded form.
    """
    _check_step(pair, k)
    diff = gamma_k(v, w, pair, k + 1).values - gamma_k(v, w, pair, k).values
    if route == "conditional":
        out = block_average(diff, pair.space.mass, pair.H(k))
    elif route == "fiber":
        out = pair.MA(k) @ diff @ pair.MB(k).T
    else:
        raise ProbabilityError(f"unknown route {route!r}")
    return pair.variable(out)


def epsilon_k(inputs: MartingaleInputs, k: int) -> RandomVariable:
    """``E_{A_k}^{w1'} E_{A_k}^{w1''} E_{B_k}^{w2'} (Delta_{B_k}[X(w1'', .) Z(w1', .)](w2'))^2``."""
    pair = inputs.pair
    _check_step(pair, k)
    db = pair.MB(k + 1) - pair.MB(k)
    inner = kernels.mixed_square(pair.MA(k), db, inputs.Z.values, inputs.X.values)
    return pair.variable(inner @ pair.MB(k).T)


def zeta_k(inputs: MartingaleInputs, k: int) -> RandomVariable:
    """Mixed term with ``epsilon_k = delta_k(X,Z) - zeta_k``.

    ``E_{B_k}^{w2'} E_{B_{k+1}}^{w2''} E_{B_{k+1}}^{w2'''} E_{A_k}^{w1'}``
    of ``Delta_{A_k}[X(., w2'') X(., w2''')] * Delta_{A_k}[Z(., w2'') Z(., w2''')]``.
    """
    pair = inputs.pair
    _check_step(pair, k)
    da = pair.MA(k + 1) - pair.MA(k)
    out = kernels.quartic_fiber(
        pair.MA(k), da, pair.MB(k), pair.MB(k + 1), inputs.X.values, inputs.Z.values
    )
    return pair.variable(out)


def eta_k(v, pair: ProductFiltrationPair, k: int) -> RandomVariable:
    """Same averages as ``zeta_k`` applied to ``(Delta_{A_k}[V(., w2'') V(., w2''')])^2``."""
    _check_step(pair, k)
    v = pair.coerce(_vals(v))
    da = pair.MA(k + 1) - pair.MA(k)
    return pair.variable(kernels.quartic_fiber(pair.MA(k), da, pair.MB(k), pair.MB(k + 1), v, v))


@dataclass(frozen=True, eq=False)
class ControlQuantities:
    k: int
    alpha: RandomVariable
    beta: RandomVariable
    gamma_XZ: RandomVariable
    gamma_XX: RandomVariable
    gamma_ZZ: RandomVariable
    delta_XZ: RandomVariable
    delta_XX: RandomVariable
    delta_ZZ: RandomVariable
    epsilon: RandomVariable
    zeta: RandomVariable
    eta_X: RandomVariable
    eta_Z: RandomVariable

    def fields(self) -> dict:
        return {f: getattr(self, f) for f in self.__dataclass_fields__ if f != "k"}

    def check(self, pair: ProductFiltrationPair, tol: float = TOL) -> dict:
        """Measurability and sign invariants; returns ``{name: bool}``."""
        out = {}
        for name, rv in self.fields().items():
            out[f"{name}_measurable"] = _h_measurable(pair, self.k, rv.values, tol)
        zero = 0 if pair.exact else -tol
        out["beta_nonneg"] = _min(self.beta.values) >= zero
        out["eta_X_nonneg"] = _min(self.eta_X.values) >= zero
        out["eta_Z_nonneg"] = _min(self.eta_Z.values) >= zero
        return out


def control_quantities(inputs: MartingaleInputs, k: int) -> ControlQuantities:
    pair = inputs.pair
    _check_step(pair, k)
    X, Z = inputs.X.values, inputs.Z.values
    return ControlQuantities(
        k=k,
        alpha=alpha_k(inputs, k),
        beta=beta_k(inputs, k),
        gamma_XZ=gamma_k(X, Z, pair, k),
        gamma_XX=gamma_k(X, X, pair, k),
        gamma_ZZ=gamma_k(Z, Z, pair, k),
        delta_XZ=delta_k(X, Z, pair, k),
        delta_XX=delta_k(X, X, pair, k),
        delta_ZZ=delta_k(Z, Z, pair, k),
        epsilon=epsilon_k(inputs, k),
        zeta=zeta_k(inputs, k),
        eta_X=eta_k(X, pair, k),
        eta_Z=eta_k(Z, pair, k),
    )


# --------------------------------------------------------------------------
# checks
# --------------------------------------------------------------------------


def drift_check(inputs: MartingaleInputs, k: int) -> RandomVariable:
    """``E(beta_{k+1}|H_k) - beta_k - |alpha_k|``; nonnegative everywhere."""
    pair = inputs.pair
    _check_step(pair, k)
    b1 = block_average(beta_k(inputs, k + 1).values, pair.space.mass, pair.H(k))
    margin = b1 - beta_k(inputs, k).values - np.abs(alpha_k(inputs, k).values)
    return pair.variable(margin)


def size_bound_margin(inputs: MartingaleInputs, k: int) -> RandomVariable:
    """``1/2 E(X^2|H)^2 + 1/2 E(Y^2|H) + 1/2 E(Z^2|H)^2 - beta_k``; nonnegative everywhere."""
    pair = inputs.pair
    _check_step(pair, k, need_next=False)
    mass, h = pair.space.mass, pair.H(k)
    X, Y, Z = inputs.X.values, inputs.Y.values, inputs.Z.values
    ex = block_average(X * X, mass, h)
    ey = block_average(Y * Y, mass, h)
    ez = block_average(Z * Z, mass, h)
    half, _ = _consts(pair)
    return pair.variable(half * ex * ex + half * ey + half * ez * ez - beta_k(inputs, k).values)


def gamma_cs_margin(v, w, pair: ProductFiltrationPair, k: int) -> RandomVariable:
    """``E(V^2|H_k) E(W^2|H_k) - gamma_k(V, W)``; nonnegative everywhere."""
    v, w = pair.coerce(_vals(v)), pair.coerce(_vals(w))
    mass, h = pair.space.mass, pair.H(k)
    bound = block_average(v * v, mass, h) * block_average(w * w, mass, h)
    return pair.variable(bound - gamma_k(v, w, pair, k).values)


def proof_chain_check(inputs: MartingaleInputs, k: int, tol: float = TOL) -> dict:
    """Evaluate every intermediate inequality and identity of the drift bound.

    Margins are ``bound - quantity`` (must be >= 0, exactly in exact mode, or
    >= -tol in float mode); gaps are ``max |lhs - rhs|`` (must be 0 or <= tol).
    """
    pair = inputs.pair
    _check_step(pair, k)
    q = control_quantities(inputs, k)
    mass, h = pair.space.mass, pair.H(k)
    half, quarter = _consts(pair)
    dy = inputs.Yp[k + 1] - inputs.Yp[k]
    ey = block_average(dy * dy, mass, h)
    a = np.abs(q.alpha.values)
    X, Z = inputs.X.values, inputs.Z.values

    margins = {
        "alpha_amgm": _min(half * ey + half * q.epsilon.values - a),
        "alpha_lhs1": _min(half * ey + half * q.delta_XZ.values + half * np.abs(q.zeta.values) - a),
        "zeta_eta": _min(half * q.eta_X.values + half * q.eta_Z.values - np.abs(q.zeta.values)),
        "eta_X_delta": _min(q.delta_XX.values - q.eta_X.values),
        "eta_Z_delta": _min(q.delta_ZZ.values - q.eta_Z.values),
        "drift": _min(drift_check(inputs, k).values),
        "size_bound": _min(size_bound_margin(inputs, k).values),
        "gamma_cs": min(
            _min(gamma_cs_margin(X, Z, pair, k).values),
            _min(gamma_cs_margin(X, X, pair, k).values),
            _min(gamma_cs_margin(Z, Z, pair, k).values),
        ),
        "beta_nonneg": _min(q.beta.values),
    }
    b1 = block_average(beta_k(inputs, k + 1).values, mass, h)
    rhs = half * ey + half * q.delta_XZ.values + quarter * q.delta_XX.values + quarter * q.delta_ZZ.values
    gaps = {
        "epsilon_split": _max_abs(q.epsilon.values - (q.delta_XZ.values - q.zeta.values)),
        "alpha_fiber": _max_abs(q.alpha.values - alpha_k_fiber(inputs, k).values),
        "delta_routes": max(
            _max_abs(q.delta_XZ.values - delta_k(X, Z, pair, k, route="fiber").values),
            _max_abs(q.delta_XX.values - delta_k(X, X, pair, k, route="fiber").values),
        ),
        "drift_assembly": _max_abs(b1 - q.beta.values - rhs),
    }
    meas = q.check(pair, tol)
    floor = 0 if pair.exact else -tol
    ok = (
        all(m >= floor for m in margins.values())
        and all((g == 0) if pair.exact else (g <= tol) for g in gaps.values())
        and all(meas.values())
    )
    return {
        "k": k,
        "margins": {name: float(v) for name, v in margins.items()},
        "gaps": {name: float(v) for name, v in gaps.items()},
        "measurable": all(meas.values()),
        "exact_margins": {name: v for name, v in margins.items()} if pair.exact else None,
        "pass": bool(ok),
    }


def _k_is_one(inputs: MartingaleInputs, n: int) -> bool:
    return all(bool(np.all(inputs.K[k] == 1)) for k in range(n))


def dual_pairing(inputs: MartingaleInputs, n: int | None = None) -> dict:
    """``E((X.Y)_n Z)`` against ``E sum_{k<n} alpha_k`` and the normalized dual ratio.

    A nontrivial ``K`` is first folded into ``Y`` (``KX.Y = X.(K.Y)``). The ratio
    uses ``||X_n||_4 ||Y_n||_2 ||Z||_4`` and is 0 when any norm vanishes.
    """
    n = inputs.horizon if n is None else n
    if not 0 <= n <= inputs.horizon:
        raise ProbabilityError(f"n={n} outside 0..{inputs.horizon}")
    if not _k_is_one(inputs, n):
        inputs = inputs.absorbed(n)
    sp = inputs.space
    xy = dot_transform(inputs.Xp, inputs.Yp, n).values
    lhs = sp.expect(xy * inputs.Z.values)
    rhs = sum((sp.expect(alpha_k(inputs, k).values) for k in range(n)),
              Fraction(0) if sp.exact else 0.0)
    mass = sp.mass
    den = (lp_norm(inputs.Xp[n], 4, mass) * lp_norm(inputs.Yp[n], 2, mass)
           * lp_norm(inputs.Z.values, 4, mass))
    ratio = abs(float(lhs)) / den if den > 0 else 0.0
    return {
        "n": n,
        "lhs": lhs,
        "rhs": rhs,
        "gap": abs(lhs - rhs),
        "ratio": ratio,
        "bound": 1.5,
        "pass": bool(ratio <= 1.5 + 1e-9),
    }


def telescoping_margin(inputs: MartingaleInputs, n: int | None = None) -> float:
    """``E beta_n - E beta_0 - sum_{k<n} E|alpha_k|``; nonnegative."""
    n = inputs.horizon if n is None else n
    sp = inputs.space
    lhs = sum((sp.expect(np.abs(alpha_k(inputs, k).values)) for k in range(n)),
              Fraction(0) if sp.exact else 0.0)
    return sp.expect(beta_k(inputs, n).values) - sp.expect(beta_k(inputs, 0).values) - lhs


def quantities_to_json(q: ControlQuantities) -> dict:
    return {"k": q.k, **{name: encode_scalars(rv.values) for name, rv in q.fields().items()}}


__all__ = [
    "ControlQuantities",
    "alpha_k",
    "alpha_k_fiber",
    "beta_k",
    "control_quantities",
    "delta_k",
    "drift_check",
    "dual_pairing",
    "epsilon_k",
    "eta_k",
    "gamma_cs_margin",
    "gamma_k",
    "proof_chain_check",
    "quantities_to_json",
    "size_bound_margin",
    "telescoping_margin",
    "zeta_k",
]
