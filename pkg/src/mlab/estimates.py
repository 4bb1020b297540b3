"""Level stopping times, localized control bounds and constant measurement.

The martingales ``Xs_k = E(X^2|H_k)`` (likewise ``Ys``, ``Zs``) are stopped at
``T_m = inf{k : Xs_k >= 4^m} ^ n``. The intervals
``[T^X_{m1-1}, T^X_{m1}) & [T^Y_{m2-1}, T^Y_{m2}) & [T^Z_{m3-1}, T^Z_{m3})``
partition ``{0..n-1}`` pointwise, and on each of them the control process
bounds the local sum of ``|alpha_k|``.

Everything here runs in float64 even for exact inputs: levels are powers of
two and the bounds are inequalities, not identities.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product

import numpy as np
from scipy.optimize import minimize

from .bellman import alpha_k, beta_k
from .probspace import (
    FiniteProbSpace,
    Filtration,
    Partition,
    ProbabilityError,
    ProductFiltrationPair,
    block_average,
    lp_norm,
)
from .transform import MartingaleInputs, dot_transform, uniform_growth_constant

TOL = 1e-10


@dataclass(frozen=True)
class ExponentTriple:
    """``1/r = 1/p + 1/q`` with ``1 < r < 2 < p, q``; ``r' = r/(r-1)``."""

    p: float
    q: float
    r: float = field(default=None)

    def __post_init__(self):
        p, q = float(self.p), float(self.q)
        r = 1.0 / (1.0 / p + 1.0 / q) if self.r is None else float(self.r)
        if abs(1.0 / r - 1.0 / p - 1.0 / q) > 1e-12:
            raise ProbabilityError(f"1/r != 1/p + 1/q for (p,q,r)=({p},{q},{r})")
        if not (1 < r < 2 < p and 2 < q and np.isfinite(p) and np.isfinite(q)):
            raise ProbabilityError(f"(p,q,r)=({p},{q},{r}) outside 1<r<2<p,q<inf")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "r", r)

    @property
    def r_dual(self) -> float:
        return self.r / (self.r - 1.0)

    @classmethod
    def parse(cls, text: str) -> "ExponentTriple":
        parts = [float(t) for t in text.split(",")]
        if len(parts) not in (2, 3):
            raise ProbabilityError(f"expected 'p,q' or 'p,q,r', got {text!r}")
        return cls(*parts)


# --------------------------------------------------------------------------
# per-instance trace of the Bellman quantities
# --------------------------------------------------------------------------


class BellmanTrace:
    """Float arrays ``alpha[k]`` (k<n), ``beta[k]`` (k<=n) and the square martingales."""

    def __init__(self, inputs: MartingaleInputs):
        self.inputs = inputs
        self.n = inputs.horizon
        self.mass = np.asarray(inputs.space.mass, dtype=float)

    @cached_property
    def alpha(self) -> np.ndarray:
        if self.n == 0:
            return np.zeros((0,) + self.inputs.pair.shape)
        return np.stack([np.asarray(alpha_k(self.inputs, k).values, dtype=float)
                         for k in range(self.n)])

    @cached_property
    def beta(self) -> np.ndarray:
        return np.stack([np.asarray(beta_k(self.inputs, k).values, dtype=float)
                         for k in range(self.n + 1)])

    def square_martingale(self, name: str) -> np.ndarray:
        v = np.asarray(getattr(self.inputs, name).values, dtype=float)
        pair = self.inputs.pair
        return np.stack([block_average(v * v, self.mass, pair.H(k)) for k in range(self.n + 1)])


def _take(proc: np.ndarray, times: np.ndarray) -> np.ndarray:
    """``proc[T(w)](w)`` for a stopping time ``T``."""
    return np.take_along_axis(proc, times[None].astype(np.int64), axis=0)[0]


# --------------------------------------------------------------------------
# stopping times
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class LevelTimes:
    """Stopping times of one square martingale at the levels of its active window.

    ``times[i]`` is ``T_{levels[i]}``. The first level is the bottom of the
    window: there ``T`` is set to 0, the limit of ``T_m`` as ``m -> -inf`` on
    every atom where the square martingale starts positive.
    """

    square: np.ndarray
    maximal: np.ndarray
    levels: np.ndarray
    times: np.ndarray

    def time(self, m: int) -> np.ndarray:
        lo, hi = int(self.levels[0]), int(self.levels[-1])
        n = self.square.shape[0] - 1
        if m <= lo:
            return self.times[0]
        if m >= hi:
            return np.full_like(self.times[0], n)
        return self.times[m - lo]


def level_window(square: np.ndarray) -> tuple[int, int]:
    """``[floor(log2 sqrt(min Xs_0)) - 1, ceil(log2 sqrt(max Xs)) + 1]``.

    ``min Xs_0`` is taken over atoms where ``Xs_0 > 0``; on atoms with
    ``Xs_0 = 0`` the variable vanishes and every ``T_m`` equals ``n``.
    """
    x0 = square[0]
    pos = x0[x0 > 0]
    if pos.size == 0:
        return 0, 1
    lo = math.floor(0.5 * math.log2(float(pos.min()))) - 1
    hi = math.ceil(0.5 * math.log2(float(square.max()))) + 1
    return lo, max(hi, lo + 1)


def level_times(square: np.ndarray, window: tuple[int, int] | None = None) -> LevelTimes:
    n = square.shape[0] - 1
    lo, hi = level_window(square) if window is None else window
    levels = np.arange(lo, hi + 1)
    times = np.empty((levels.size,) + square.shape[1:], dtype=np.int64)
    for i, m in enumerate(levels):
        hit = square >= 4.0**m
        first = np.where(hit.any(axis=0), hit.argmax(axis=0), n)
        times[i] = np.minimum(first, n)
    times[0] = 0
    maximal = np.maximum.accumulate(square, axis=0)
    return LevelTimes(square, maximal, levels, times)


@dataclass(frozen=True, eq=False)
class StoppingData:
    n: int
    X: LevelTimes
    Y: LevelTimes
    Z: LevelTimes

    def triples(self):
        """All level triples ``(m1, m2, m3)`` whose intervals can be nonempty."""
        ranges = [range(int(t.levels[0]) + 1, int(t.levels[-1]) + 1) for t in (self.X, self.Y, self.Z)]
        return product(*ranges)

    def interval(self, m1: int, m2: int, m3: int) -> tuple[np.ndarray, np.ndarray]:
        sigma = np.maximum(np.maximum(self.X.time(m1 - 1), self.Y.time(m2 - 1)), self.Z.time(m3 - 1))
        tau = np.minimum(np.minimum(self.X.time(m1), self.Y.time(m2)), self.Z.time(m3))
        return sigma, tau


def build_stopping(inputs: MartingaleInputs, trace: BellmanTrace | None = None) -> StoppingData:
    trace = BellmanTrace(inputs) if trace is None else trace
    data = StoppingData(
        inputs.horizon,
        level_times(trace.square_martingale("X")),
        level_times(trace.square_martingale("Y")),
        level_times(trace.square_martingale("Z")),
    )
    problems = validate_stopping(inputs, data)
    if problems:
        raise ProbabilityError("; ".join(problems))
    return data


def is_stopping_time(inputs: MartingaleInputs, t: np.ndarray) -> bool:
    """``{T <= k}`` is ``H_k``-measurable for every ``k``."""
    pair = inputs.pair
    return all(pair.H(k).is_measurable(t <= k) for k in range(inputs.horizon + 1))


def validate_stopping(inputs: MartingaleInputs, data: StoppingData) -> list[str]:
    problems = []
    n = data.n
    for name in ("X", "Y", "Z"):
        lt: LevelTimes = getattr(data, name)
        if np.any(np.diff(lt.times, axis=0) < 0):
            problems.append(f"{name}: T_m not monotone in m")
        if np.any(lt.times > n) or np.any(lt.times < 0):
            problems.append(f"{name}: T_m outside 0..n")
        if np.any(lt.times[-1] != n):
            problems.append(f"{name}: top level does not stop at n")
        for i in range(lt.levels.size):
            if not is_stopping_time(inputs, lt.times[i]):
                problems.append(f"{name}: T_{lt.levels[i]} is not a stopping time")
    return problems


def interval_cover_count(data: StoppingData) -> np.ndarray:
    """For each ``k < n`` and outcome, how many level intervals contain ``k``."""
    shape = data.X.times.shape[1:]
    count = np.zeros((data.n,) + shape, dtype=np.int64)
    ks = np.arange(data.n).reshape((-1,) + (1,) * len(shape))
    for m1, m2, m3 in data.triples():
        sigma, tau = data.interval(m1, m2, m3)
        count += (sigma[None] <= ks) & (ks < tau[None])
    return count


# --------------------------------------------------------------------------
# localized bounds
# --------------------------------------------------------------------------


def localized_bound_check(inputs: MartingaleInputs, sigma: np.ndarray, tau: np.ndarray,
                          trace: BellmanTrace | None = None, A: float | None = None,
                          caps: tuple[int, int, int] | None = None) -> dict:
    """``E sum_{k in [sigma, tau)} |alpha_k|`` against its two control bounds.

    ``margin0 = LHS - ||beta_tau 1_{tau>0}||_inf P(sigma<n)`` and
    ``margin1 = LHS - 3/2 (||Xs_tau 1|| ||Ys_tau 1|| ||Zs_tau 1||)^{1/2} P(sigma<n)``;
    both must be <= 0. With ``caps = (m1, m2, m3)`` the three sup norms are also
    checked against ``A 4^{m}``.
    """
    trace = BellmanTrace(inputs) if trace is None else trace
    sigma = np.asarray(sigma, dtype=np.int64)
    tau = np.asarray(tau, dtype=np.int64)
    n = trace.n
    if np.any(sigma > tau) or np.any(tau > n) or np.any(sigma < 0):
        raise ProbabilityError("need 0 <= sigma <= tau <= n")
    mass = trace.mass
    ks = np.arange(n).reshape((-1,) + (1,) * sigma.ndim)
    inside = (sigma[None] <= ks) & (ks < tau[None])
    lhs = float((mass[None] * np.abs(trace.alpha) * inside).sum())
    p_sigma = float(mass[sigma < n].sum())
    live = tau > 0

    def sup(proc):
        v = _take(proc, tau)[live]
        return float(v.max()) if v.size else 0.0

    b0 = sup(trace.beta) * p_sigma
    norms = [sup(trace.square_martingale(nm)) for nm in ("X", "Y", "Z")]
    b1 = 1.5 * math.sqrt(norms[0] * norms[1] * norms[2]) * p_sigma
    out = {"lhs": lhs, "bound0": b0, "bound1": b1, "margin0": lhs - b0, "margin1": lhs - b1,
           "norms": norms, "p_sigma": p_sigma}
    if caps is not None:
        A = float(uniform_growth_constant(inputs.pair)) if A is None else A
        cap_vals = [A * 4.0**m for m in caps]
        out["cap_margin"] = max(nm - c * (1 + 1e-12) for nm, c in zip(norms, cap_vals))
    scale = max(1.0, b0, b1)
    out["pass"] = bool(out["margin0"] <= TOL * scale and out["margin1"] <= TOL * scale
                       and out.get("cap_margin", -1.0) <= TOL * scale)
    return out


def level_interval_checks(inputs: MartingaleInputs, trace: BellmanTrace | None = None,
                          data: StoppingData | None = None) -> dict:
    """Run :func:`localized_bound_check` on every nonempty level interval."""
    trace = BellmanTrace(inputs) if trace is None else trace
    data = build_stopping(inputs, trace) if data is None else data
    A = float(uniform_growth_constant(inputs.pair))
    worst0 = worst1 = worst_cap = -math.inf
    count = 0
    ok = True
    inclusion_ok = True
    for m in data.triples():
        sigma, tau = data.interval(*m)
        if not np.any(sigma < tau):
            continue
        count += 1
        # both sides vanish outside {sigma < n} & {tau > 0}
        nonempty = sigma < tau
        inclusion_ok &= bool(np.all((sigma[nonempty] < data.n) & (tau[nonempty] > 0)))
        sigma_c = np.minimum(sigma, tau)
        r = localized_bound_check(inputs, sigma_c, tau, trace, A=A, caps=m)
        worst0 = max(worst0, r["margin0"])
        worst1 = max(worst1, r["margin1"])
        worst_cap = max(worst_cap, r["cap_margin"])
        ok &= r["pass"]
    return {"intervals": count, "max_margin0": worst0, "max_margin1": worst1,
            "max_cap_margin": worst_cap, "inclusion": inclusion_ok, "A": A,
            "pass": bool(ok and inclusion_ok)}


# --------------------------------------------------------------------------
# Doob level sums and the three-way majorant
# --------------------------------------------------------------------------


def _floor_half_log2(v: np.ndarray) -> np.ndarray:
    """``floor(log2(v) / 2)`` for ``v > 0``, exact at powers of two."""
    _, e = np.frexp(v)
    return np.floor_divide(e - 1, 2)


def doob_level_sum(maximal: np.ndarray, mass: np.ndarray, p: float, shift: int = 0) -> float:
    """``sum_{m in Z} 2^{mp} P(maximal >= 4^{m - shift})`` in closed form.

    For an outcome with value ``v > 0`` the levels that count are
    ``m <= floor(log2(v)/2) + shift``, a geometric series.
    """
    pos = maximal > 0
    if not np.any(pos):
        return 0.0
    top = _floor_half_log2(maximal[pos]) + shift
    return float((mass[pos] * 2.0 ** (top * p)).sum() / (1.0 - 2.0**-p))


def doob_check(inputs: MartingaleInputs, exponents: ExponentTriple) -> dict:
    """Dyadic level sums ``sum_m 2^{mp} P(max_k Xs_k >= 4^m)`` against ``||X||_p^p``.

    Reports the measured ratios and checks that each level sum is
    nondecreasing as the filtration gains steps (horizon ``0..n``).
    """
    trace = BellmanTrace(inputs)
    mass = trace.mass
    out = {}
    ok = True
    for name, e in (("X", exponents.p), ("Y", exponents.q), ("Z", exponents.r_dual)):
        sq = trace.square_martingale(name)
        maximal = np.maximum.accumulate(sq, axis=0)
        sums = [doob_level_sum(maximal[k], mass, e) for k in range(trace.n + 1)]
        norm = lp_norm(getattr(inputs, name).values, e, mass) ** e
        ratio = sums[-1] / norm if norm > 0 else 0.0
        mono = all(b >= a * (1 - 1e-12) for a, b in zip(sums, sums[1:]))
        ok &= bool(np.isfinite(ratio) and mono)
        out[name] = {"exponent": e, "level_sum": sums[-1], "norm_pow": norm, "ratio": ratio,
                     "monotone": mono, "by_horizon": sums}
    out["pass"] = ok
    return out


def _tail_profile(maximal: np.ndarray, mass: np.ndarray):
    """Levels, weights and probabilities ``P(maximal >= 4^{m-1})`` for the majorant.

    Levels at or below ``L`` all have probability ``P(maximal > 0)``; they are
    folded into one representative of weight ``sum_{m<=L} 2^m = 2^{L+1}``.
    """
    pos = maximal > 0
    if not np.any(pos):
        return np.zeros(0), np.zeros(0), np.zeros(0)
    vals = maximal[pos]
    low = int(_floor_half_log2(vals).min()) + 1
    high = int(_floor_half_log2(vals).max()) + 1
    levels = np.arange(low, high + 1)
    probs = np.array([mass[maximal >= 4.0 ** (m - 1)].sum() for m in levels])
    weights = 2.0**levels
    weights[0] = 2.0 ** (low + 1)
    return levels, weights, probs


def bigsum(trace: BellmanTrace, scales=(1.0, 1.0, 1.0)) -> float:
    """``sum_{m1,m2,m3} 2^{m1+m2+m3} min_i P(max Vs_i >= 4^{m_i - 1})`` for ``V_i / scale_i``."""
    profiles = []
    for name, s in zip(("X", "Y", "Z"), scales):
        sq = trace.square_martingale(name) / (s * s)
        profiles.append(_tail_profile(sq.max(axis=0), trace.mass))
    if any(p[0].size == 0 for p in profiles):
        return 0.0
    (_, w1, p1), (_, w2, p2), (_, w3, p3) = profiles
    m = np.minimum(np.minimum(p1[:, None, None], p2[None, :, None]), p3[None, None, :])
    return float((w1[:, None, None] * w2[None, :, None] * w3[None, None, :] * m).sum())


def dominant_subsum(trace: BellmanTrace, exponents: ExponentTriple, scales=(1.0, 1.0, 1.0),
                    extra_levels: int = 50) -> dict:
    """The part of :func:`bigsum` where ``p m1`` is the largest of ``p m1, q m2, r' m3``.

    Compared with ``4 sum_m 2^{pm} P(max Xs >= 4^{m-1}) = 2^{p+2} * level_sum``.
    The triple sum is truncated ``extra_levels`` below the lowest active level.
    """
    p, q, rd = exponents.p, exponents.q, exponents.r_dual
    tails = []
    for name, s in zip(("X", "Y", "Z"), scales):
        sq = trace.square_martingale(name) / (s * s)
        tails.append(sq.max(axis=0))
    if any(not np.any(t > 0) for t in tails):
        return {"subsum": 0.0, "bound": 0.0, "pass": True}
    rng = []
    for t in tails:
        vals = t[t > 0]
        lo = int(_floor_half_log2(vals).min()) + 1 - extra_levels
        hi = int(_floor_half_log2(vals).max()) + 1
        rng.append(np.arange(lo, hi + 1))
    probs = [np.array([trace.mass[t >= 4.0 ** (m - 1)].sum() for m in r]) for t, r in zip(tails, rng)]
    m1, m2, m3 = np.meshgrid(*rng, indexing="ij")
    region = (p * m1 >= q * m2) & (p * m1 >= rd * m3)
    mins = np.minimum(np.minimum(probs[0][:, None, None], probs[1][None, :, None]),
                      probs[2][None, None, :])
    sub = float((2.0 ** (m1 + m2 + m3) * mins * region).sum())
    level_sum = doob_level_sum(tails[0], trace.mass, p, shift=1)
    bound = 4.0 * level_sum
    return {"subsum": sub, "bound": bound, "level_sum": level_sum,
            "pass": bool(sub <= bound * (1 + 1e-12) + 1e-300)}


def geometric_step(ratio: float, m1: int, depth: int = 200) -> float:
    """``sum_{m2 <= ratio*m1} 2^{m2 - ratio*m1}`` truncated ``depth`` terms down; at most 2."""
    t = ratio * m1
    top = math.floor(t)
    return float(sum(2.0 ** (m - t) for m in range(top - depth, top + 1)))


def theorem1b_constant(inputs: MartingaleInputs, exponents: ExponentTriple) -> dict:
    """Direct ratio ``|E((X.Y)_n Z)| / (A^{3/2} ||X_n||_p ||Y_n||_q ||Z||_{r'})`` and its majorant.

    The majorant is ``3/2 * bigsum`` of the normalized variables. Also checks
    ``E sum |alpha_k| <= 3/2 A^{3/2} bigsum`` without normalization, and the
    ``p m1``-dominant sub-sum bound. Instances with a zero norm are skipped.
    """
    n = inputs.horizon
    if not all(bool(np.all(inputs.K[k] == 1)) for k in range(n)):
        inputs = inputs.absorbed(n)
    else:
        inputs = inputs.reduced(n)
    trace = BellmanTrace(inputs)
    mass = trace.mass
    A = float(uniform_growth_constant(inputs.pair))
    xs = np.asarray(inputs.X.values, dtype=float)
    ys = np.asarray(inputs.Y.values, dtype=float)
    zs = np.asarray(inputs.Z.values, dtype=float)
    nx, ny, nz = lp_norm(xs, exponents.p, mass), lp_norm(ys, exponents.q, mass), lp_norm(
        zs, exponents.r_dual, mass)
    if min(nx, ny, nz) == 0:
        return {"skipped": True, "pass": True}
    xy = np.asarray(dot_transform(inputs.Xp, inputs.Yp, n).values, dtype=float)
    pairing = float((mass * xy * zs).sum())
    direct = abs(pairing) / (A**1.5 * nx * ny * nz)
    s_norm = bigsum(trace, (nx, ny, nz))
    majorant = 1.5 * s_norm
    abs_alpha = float((mass[None] * np.abs(trace.alpha)).sum())
    raw_bound = 1.5 * A**1.5 * bigsum(trace)
    sub = dominant_subsum(trace, exponents, (nx, ny, nz))
    ok = (direct <= majorant * (1 + 1e-9) + 1e-12
          and abs_alpha <= raw_bound * (1 + 1e-9) + 1e-12
          and sub["pass"])
    return {
        "skipped": False,
        "A": A,
        "direct": direct,
        "majorant": majorant,
        "sum_abs_alpha": abs_alpha,
        "alpha_bound": raw_bound,
        "subsum": sub,
        "pass": bool(ok),
    }


def aligned_dual(w: np.ndarray, exponents: ExponentTriple) -> np.ndarray:
    """``sign(W)|W|^{r-1}``: the ``Z`` that attains ``||W||_r`` in the ``L^{r'}`` pairing."""
    return np.sign(w) * np.abs(w) ** (exponents.r - 1.0)


# --------------------------------------------------------------------------
# constant search
# --------------------------------------------------------------------------


def interleaved_dyadic_pair(horizon: int, depth: int = 3) -> ProductFiltrationPair:
    """Uniform ``2^depth x 2^depth`` space whose two dyadic filtrations split in turn.

    ``F`` refines at even steps and ``G`` at odd steps, until each is discrete;
    the growth constant of ``H_k`` is 2.
    """
    size = 2**depth
    a, b = [], []
    ka = kb = 0
    for k in range(horizon + 1):
        a.append(Partition(np.arange(size) >> (depth - min(ka, depth))))
        b.append(Partition(np.arange(size) >> (depth - min(kb, depth))))
        if k % 2 == 0:
            ka += 1
        else:
            kb += 1
    sp = FiniteProbSpace.uniform(size)
    return ProductFiltrationPair(sp, sp, Filtration(tuple(a)), Filtration(tuple(b)))


def _transform_objective(pair: ProductFiltrationPair, n: int, exponents: ExponentTriple):
    ma = [np.asarray(pair.MA(k), dtype=float) for k in range(n + 1)]
    mb = [np.asarray(pair.MB(k), dtype=float) for k in range(n + 1)]
    mass = np.asarray(pair.space.mass, dtype=float)
    shape = pair.shape
    size = shape[0] * shape[1]
    p, q, r = exponents.p, exponents.q, exponents.r

    def split(theta):
        return theta[:size].reshape(shape), theta[size:].reshape(shape)

    def ratio(theta):
        x, y = split(theta)
        xk = [m @ x for m in ma]
        yk = [y @ m.T for m in mb]
        w = sum(xk[k - 1] * (yk[k] - yk[k - 1]) for k in range(1, n + 1))
        num = lp_norm(w, r, mass)
        den = lp_norm(xk[n], p, mass) * lp_norm(yk[n], q, mass)
        return num / den if den > 0 else 0.0

    return ratio, split


def search_constant(pair: ProductFiltrationPair, n: int, exponents: ExponentTriple,
                    rng: np.random.Generator, restarts: int = 8, maxiter: int = 500) -> dict:
    """Maximize ``||(X.Y)_n||_r / (||X_n||_p ||Y_n||_q)`` over ``X, Y`` by L-BFGS-B.

    ``C`` is the best ratio divided by ``A^{3/2}``. The maximizer is re-checked
    through :func:`theorem1b_constant` with the aligned dual ``Z``, whose direct
    ratio must reproduce ``C``.
    """
    if pair.exact:
        raise ProbabilityError("constant search runs in float mode")
    ratio, split = _transform_objective(pair, n, exponents)
    size = 2 * pair.shape[0] * pair.shape[1]
    best, best_theta = 0.0, None
    for _ in range(restarts):
        res = minimize(lambda t: -ratio(t), rng.standard_normal(size), method="L-BFGS-B",
                       options={"maxiter": maxiter})
        if -res.fun > best:
            best, best_theta = float(-res.fun), res.x
    A = float(uniform_growth_constant(pair))
    out = {"n": n, "A": A, "ratio": best, "C": best / A**1.5, "restarts": restarts}
    if best_theta is None:
        out.update(direct=0.0, bounds_hold=True)
        return out
    x, y = split(best_theta)
    inputs = MartingaleInputs(pair, x, y, np.ones(pair.shape))
    w = np.asarray(dot_transform(inputs.Xp, inputs.Yp, n).values, dtype=float)
    check = theorem1b_constant(inputs.with_values(Z=aligned_dual(w, exponents)), exponents)
    out["direct"] = check.get("direct", 0.0)
    out["bounds_hold"] = bool(check["pass"])
    out["X"], out["Y"] = x, y
    return out
