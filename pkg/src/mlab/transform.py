"""Martingale transforms on product filtrations.

``(U.V)_n = sum_{k=1}^n U_{k-1} (V_k - V_{k-1})`` and the two modified
transforms ``(KX.Y)_n`` and ``(K.XY)_n``, where ``X_k = E(X|F_k)`` runs in the
horizontal filtration and ``Y_k = E(Y|G_k)`` in the vertical one.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from .probspace import (
    FiniteProbSpace,
    ProbabilityError,
    ProductFiltrationPair,
    RandomVariable,
    _max_abs,
    block_average,
    lp_norm,
)

MARTINGALE_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class DiscreteProcess:
    """Random variables ``steps[0..n]`` on one space."""

    steps: tuple

    def __post_init__(self):
        steps = tuple(self.steps)
        if not steps:
            raise ProbabilityError("a process needs at least one step")
        space = steps[0].space
        for s in steps[1:]:
            if s.space is not space and s.space != space:
                raise ProbabilityError("process steps live on different spaces")
        object.__setattr__(self, "steps", steps)

    @classmethod
    def from_arrays(cls, arrays, space: FiniteProbSpace) -> "DiscreteProcess":
        return cls(tuple(RandomVariable(a, space) for a in arrays))

    @classmethod
    def constant(cls, value, space: FiniteProbSpace, horizon: int) -> "DiscreteProcess":
        vals = np.full(space.shape, Fraction(value) if space.exact else float(value),
                       dtype=object if space.exact else float)
        return cls.from_arrays([vals] * (horizon + 1), space)

    @property
    def space(self) -> FiniteProbSpace:
        return self.steps[0].space

    @property
    def horizon(self) -> int:
        return len(self.steps) - 1

    def __getitem__(self, k: int) -> np.ndarray:
        return self.steps[k].values

    def __len__(self):
        return len(self.steps)


def _zero(space: FiniteProbSpace) -> np.ndarray:
    return space.coerce(np.zeros(space.shape))


def dot_transform(u: DiscreteProcess, v: DiscreteProcess, n: int) -> RandomVariable:
    """``(U.V)_n``; zero for ``n = 0``."""
    if u.space is not v.space and u.space != v.space:
        raise ProbabilityError("processes live on different spaces")
    if n < 0 or n > v.horizon or n - 1 > u.horizon:
        raise ProbabilityError(f"n={n} exceeds the process horizon")
    acc = _zero(v.space)
    for k in range(1, n + 1):
        acc = acc + u[k - 1] * (v[k] - v[k - 1])
    return RandomVariable(acc, v.space)


@dataclass(frozen=True, eq=False)
class MartingaleInputs:
    """Terminal variables ``X, Y, Z`` and multiplier ``K`` on a product filtration.

    ``X_k = E(X|F_k)`` and ``Y_k = E(Y|G_k)``. ``K_k`` must be ``H_k``-measurable;
    it defaults to the constant one process.
    """

    pair: ProductFiltrationPair
    X: RandomVariable
    Y: RandomVariable
    Z: RandomVariable
    K: DiscreteProcess | None = None

    def __post_init__(self):
        sp = self.pair.space
        for name in ("X", "Y", "Z"):
            v = getattr(self, name)
            if not isinstance(v, RandomVariable):
                v = RandomVariable(v, sp)
            elif v.space is not sp and v.space != sp:
                raise ProbabilityError(f"{name} lives on a different space")
            elif v.space is not sp:
                v = RandomVariable(v.values, sp)
            object.__setattr__(self, name, v)
        K = self.K
        if K is None:
            K = DiscreteProcess.constant(1, sp, self.pair.horizon)
        elif not isinstance(K, DiscreteProcess):
            K = DiscreteProcess.from_arrays(K, sp)
        if K.horizon < self.pair.horizon - 1:
            raise ProbabilityError("K must supply K_0..K_{n-1}")
        for k in range(min(K.horizon, self.pair.horizon) + 1):
            if not self.pair.H(k).is_measurable(K[k]):
                raise ProbabilityError(f"K_{k} is not H_{k}-measurable")
        object.__setattr__(self, "K", K)
        self.check_martingales()

    @property
    def horizon(self) -> int:
        return self.pair.horizon

    @property
    def space(self) -> FiniteProbSpace:
        return self.pair.space

    @property
    def exact(self) -> bool:
        return self.pair.exact

    @cached_property
    def Xp(self) -> DiscreteProcess:
        x = self.X.values
        return DiscreteProcess.from_arrays(
            [self.pair.cond_F(x, k) for k in range(self.horizon + 1)], self.space
        )

    @cached_property
    def Yp(self) -> DiscreteProcess:
        y = self.Y.values
        return DiscreteProcess.from_arrays(
            [self.pair.cond_G(y, k) for k in range(self.horizon + 1)], self.space
        )

    def check_martingales(self) -> None:
        """Verify ``E(X_{k+1}|F_k) = X_k`` and ``E(Y_{k+1}|G_k) = Y_k`` with partition averages."""
        mass = self.space.mass
        tol = 0 if self.exact else MARTINGALE_TOL
        for k in range(self.horizon):
            gx = _max_abs(block_average(self.Xp[k + 1], mass, self.pair.F(k)) - self.Xp[k])
            gy = _max_abs(block_average(self.Yp[k + 1], mass, self.pair.G(k)) - self.Yp[k])
            if gx > tol or gy > tol:
                raise ProbabilityError(f"martingale property fails at step {k}")

    def with_values(self, X=None, Y=None, Z=None, K=None) -> "MartingaleInputs":
        return MartingaleInputs(
            self.pair,
            self.X if X is None else X,
            self.Y if Y is None else Y,
            self.Z if Z is None else Z,
            self.K if K is None else K,
        )

    def reduced(self, n: int | None = None) -> "MartingaleInputs":
        """Replace ``X, Y`` by ``X_n, Y_n``; transforms up to ``n`` are unchanged."""
        n = self.horizon if n is None else n
        return self.with_values(X=self.Xp[n], Y=self.Yp[n])

    def absorbed(self, n: int | None = None) -> "MartingaleInputs":
        """Fold ``K`` into ``Y``: ``Y -> (K.Y)_n`` and ``K -> 1`` so that ``KX.Y = X.(K.Y)``."""
        n = self.horizon if n is None else n
        ky = dot_transform(self.K, self.Yp, n)
        return MartingaleInputs(self.pair, self.Xp[n], ky, self.Z)


def _check_n(inputs: MartingaleInputs, n: int):
    if not 0 <= n <= inputs.horizon:
        raise ProbabilityError(f"n={n} outside 0..{inputs.horizon}")


def _product_process(a: DiscreteProcess, b: DiscreteProcess) -> DiscreteProcess:
    return DiscreteProcess.from_arrays([a[k] * b[k] for k in range(len(a))], a.space)


def kx_dot_y(inputs: MartingaleInputs, n: int) -> RandomVariable:
    """``sum_{k=1}^n K_{k-1} X_{k-1} (Y_k - Y_{k-1})``."""
    _check_n(inputs, n)
    X, Y, K = inputs.Xp, inputs.Yp, inputs.K
    acc = _zero(inputs.space)
    for k in range(1, n + 1):
        acc = acc + K[k - 1] * X[k - 1] * (Y[k] - Y[k - 1])
    return RandomVariable(acc, inputs.space)


def ky_dot_x(inputs: MartingaleInputs, n: int) -> RandomVariable:
    """``sum_{k=1}^n K_{k-1} Y_{k-1} (X_k - X_{k-1})``."""
    _check_n(inputs, n)
    X, Y, K = inputs.Xp, inputs.Yp, inputs.K
    acc = _zero(inputs.space)
    for k in range(1, n + 1):
        acc = acc + K[k - 1] * Y[k - 1] * (X[k] - X[k - 1])
    return RandomVariable(acc, inputs.space)


def k_dot_xy(inputs: MartingaleInputs, n: int) -> RandomVariable:
    """``sum_{k=1}^n K_{k-1} (X_k Y_k - X_{k-1} Y_{k-1})``."""
    _check_n(inputs, n)
    return dot_transform(inputs.K, _product_process(inputs.Xp, inputs.Yp), n)


def covariation_sum(inputs: MartingaleInputs, n: int) -> RandomVariable:
    """``sum_{k=1}^n K_{k-1} (X_k - X_{k-1}) (Y_k - Y_{k-1})``."""
    _check_n(inputs, n)
    X, Y, K = inputs.Xp, inputs.Yp, inputs.K
    acc = _zero(inputs.space)
    for k in range(1, n + 1):
        acc = acc + K[k - 1] * (X[k] - X[k - 1]) * (Y[k] - Y[k - 1])
    return RandomVariable(acc, inputs.space)


def splitting_residual(inputs: MartingaleInputs, n: int):
    """Max over outcomes of ``|(K.XY) - (KX.Y) - (KY.X) - sum K dX dY|``."""
    r = (
        k_dot_xy(inputs, n).values
        - kx_dot_y(inputs, n).values
        - ky_dot_x(inputs, n).values
        - covariation_sum(inputs, n).values
    )
    return _max_abs(r)


def ito_isometry_gap(inputs: MartingaleInputs, n: int, which: str = "X"):
    """``| ||(K.M)_n||_2^2 - E sum K_{k-1}^2 (M_k - M_{k-1})^2 |`` for ``M`` = X or Y."""
    _check_n(inputs, n)
    if which not in ("X", "Y"):
        raise ProbabilityError(f"which must be 'X' or 'Y', got {which!r}")
    m = inputs.Xp if which == "X" else inputs.Yp
    K = inputs.K
    t = dot_transform(K, m, n).values
    lhs = inputs.space.expect(t * t)
    acc = _zero(inputs.space)
    for k in range(1, n + 1):
        d = m[k] - m[k - 1]
        acc = acc + K[k - 1] * K[k - 1] * d * d
    rhs = inputs.space.expect(acc)
    return abs(lhs - rhs)


def burkholder_transform(K: DiscreteProcess, Y: DiscreteProcess, n: int) -> RandomVariable:
    """Classical transform ``(K.Y)_n``."""
    return dot_transform(K, Y, n)


def burkholder_ratio(K: DiscreteProcess, Y: DiscreteProcess, n: int, q: float) -> float:
    """``||(K.Y)_n||_q / (max_{k<n} ||K_k||_inf ||Y_n||_q)``; zero when the denominator vanishes."""
    t = burkholder_transform(K, Y, n)
    kmax = max((lp_norm(K.steps[k], np.inf) for k in range(n)), default=0.0)
    den = kmax * lp_norm(Y.steps[n], q)
    if den == 0:
        return 0.0
    ratio = lp_norm(t, q) / den
    if not np.isfinite(ratio):
        raise ProbabilityError("non-finite transform ratio")
    return ratio


def uniform_growth_constant(pair: ProductFiltrationPair) -> float | Fraction:
    """Smallest ``A`` with ``||E(U|H_{k+1})||_inf <= A ||E(U|H_k)||_inf`` for all ``U >= 0``.

    For partition sigma-algebras this is the worst ratio of a parent ``H_k``
    atom mass to the mass of one of its ``H_{k+1}`` children (take ``U`` the
    indicator of the child).
    """
    mass = pair.space.mass.ravel()
    best = Fraction(1) if pair.exact else 1.0
    for k in range(pair.horizon):
        hk, hk1 = pair.H(k), pair.H(k + 1)
        pm = _block_mass(mass, hk)
        cm = _block_mass(mass, hk1)
        # any member of a child block names its parent
        _, member = np.unique(hk1.block_of, return_index=True)
        for child, i in enumerate(member):
            ratio = pm[hk.block_of[i]] / cm[child]
            if ratio > best:
                best = ratio
    return best


def _block_mass(mass: np.ndarray, p) -> np.ndarray:
    if mass.dtype == object:
        out = np.array([Fraction(0)] * p.block_count, dtype=object)
        for m, b in zip(mass, p.block_of):
            out[b] += m
        return out
    return np.bincount(p.block_of, weights=mass, minlength=p.block_count)


def growth_probe(pair: ProductFiltrationPair, rng: np.random.Generator, samples: int = 64) -> float:
    """Largest observed ``||E(U|H_{k+1})||_inf / ||E(U|H_k)||_inf`` over random ``U >= 0``."""
    mass = np.asarray(pair.space.mass, dtype=float)
    best = 1.0 if pair.horizon == 0 else 0.0
    for k in range(pair.horizon):
        for _ in range(samples):
            u = rng.random(pair.shape) ** rng.uniform(1, 8)
            u *= rng.random(pair.shape) < 0.5
            lo = np.max(block_average(u, mass, pair.H(k)))
            if lo <= 0:
                continue
            hi = np.max(block_average(u, mass, pair.H(k + 1)))
            best = max(best, hi / lo)
    return best


def theorem1a_ratios(inputs: MartingaleInputs, n: int | None = None) -> dict:
    """Ratios for the two modified-transform estimates.

    ``ratio1 = ||(KX.Y)_n||_{4/3} / (||X_n||_4 ||(K.Y)_n||_2)`` is bounded by 3/2
    (the dual pairing bound applied to ``X`` and ``(K.Y)``). ``ratio2`` is the
    analogous ratio for ``(K.XY)_n`` and is only recorded.
    """
    n = inputs.horizon if n is None else n
    _check_n(inputs, n)
    mass = inputs.space.mass
    kxy = kx_dot_y(inputs, n)
    kxy2 = k_dot_xy(inputs, n)
    ky = dot_transform(inputs.K, inputs.Yp, n)
    kx = dot_transform(inputs.K, inputs.Xp, n)
    xn = lp_norm(inputs.Xp[n], 4, mass)
    yn = lp_norm(inputs.Yp[n], 4, mass)
    d1 = xn * lp_norm(ky, 2)
    d2 = d1 + yn * lp_norm(kx, 2)
    lhs1 = lp_norm(kxy, 4 / 3)
    lhs2 = lp_norm(kxy2, 4 / 3)
    r1 = lhs1 / d1 if d1 > 0 else 0.0
    r2 = lhs2 / d2 if d2 > 0 else 0.0
    return {
        "n": n,
        "ratio1": r1,
        "ratio2": r2,
        "bound1": 1.5,
        "pass": bool(np.isfinite(r1) and np.isfinite(r2) and r1 <= 1.5 + 1e-9),
    }
