"""Monte-Carlo product Brownian ensembles and the elementary integral against ``d(X_s Y_s)``.

Outcomes are path-index pairs ``(i, j)`` with uniform weight ``1/(m1 m2)``; a
random variable is an ``(m1, m2)`` array. Time is the grid ``0, dt, ..., t``
with ``steps`` intervals, and partition times are grid indices.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable

import numpy as np
from scipy import integrate, special

from .probspace import FiniteProbSpace, ProbabilityError, lp_norm

SIGMA_MARGIN = 5.0


def _norm(values: np.ndarray, p: float) -> float:
    return lp_norm(values, p, np.full(values.shape, 1.0 / values.size))


# --------------------------------------------------------------------------
# ensembles
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BrownianProductEnsemble:
    """Independent path families ``A`` (``m1 x (steps+1)``) and ``B`` (``m2 x (steps+1)``)."""

    A_paths: np.ndarray
    B_paths: np.ndarray
    t: float = 1.0
    seed: int | None = None
    kind: str = "gaussian"

    def __post_init__(self):
        a = np.asarray(self.A_paths, dtype=float)
        b = np.asarray(self.B_paths, dtype=float)
        if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[1] or a.shape[1] < 2:
            raise ProbabilityError("path arrays must be (m, steps+1) with a shared time grid")
        if not (np.all(a[:, 0] == 0) and np.all(b[:, 0] == 0)):
            raise ProbabilityError("paths must start at 0")
        if not self.t > 0:
            raise ProbabilityError("horizon must be positive")
        for v in (a, b):
            v.flags.writeable = False
        object.__setattr__(self, "A_paths", a)
        object.__setattr__(self, "B_paths", b)

    @classmethod
    def generate(cls, m1: int = 256, m2: int = 256, steps: int = 1024, t: float = 1.0,
                 seed: int = 0) -> "BrownianProductEnsemble":
        """Gaussian increments of variance ``t/steps``; ``A`` and ``B`` use separate streams."""
        sa, sb = np.random.SeedSequence(int(seed)).spawn(2)
        dt = t / steps

        def paths(ss, m):
            inc = np.random.default_rng(ss).standard_normal((m, steps)) * np.sqrt(dt)
            return np.concatenate([np.zeros((m, 1)), np.cumsum(inc, axis=1)], axis=1)

        return cls(paths(sa, m1), paths(sb, m2), t, int(seed), "gaussian")

    @classmethod
    def binomial(cls, steps: int = 8, t: float = 1.0) -> "BrownianProductEnsemble":
        """All ``2^steps`` simple random walks with steps ``+-sqrt(dt)`` in each factor.

        Under the uniform weight this is an exact martingale model, so orthogonality
        identities hold to rounding error.
        """
        if not 1 <= steps <= 10:
            raise ProbabilityError("binomial tree limited to 1..10 steps")
        bits = (np.arange(2**steps)[:, None] >> np.arange(steps - 1, -1, -1)) & 1
        # integer walks, scaled afterwards, so walks ending at 0 do so exactly
        walk = np.cumsum(2 * bits - 1, axis=1)
        p = np.concatenate([np.zeros((2**steps, 1)), walk * np.sqrt(t / steps)], axis=1)
        return cls(p, p.copy(), t, None, "binomial")

    @property
    def m1(self) -> int:
        return self.A_paths.shape[0]

    @property
    def m2(self) -> int:
        return self.B_paths.shape[0]

    @property
    def steps(self) -> int:
        return self.A_paths.shape[1] - 1

    @property
    def dt(self) -> float:
        return self.t / self.steps

    @property
    def shape(self) -> tuple[int, int]:
        return (self.m1, self.m2)

    @cached_property
    def space(self) -> FiniteProbSpace:
        return FiniteProbSpace.uniform(self.shape)

    def subset(self, m1: int, m2: int) -> "BrownianProductEnsemble":
        """The first ``m1`` and ``m2`` paths of each family."""
        if not (1 <= m1 <= self.m1 and 1 <= m2 <= self.m2):
            raise ProbabilityError("subset larger than the ensemble")
        return BrownianProductEnsemble(self.A_paths[:m1], self.B_paths[:m2], self.t, self.seed,
                                       self.kind)

    def validate(self, margin: float = SIGMA_MARGIN) -> dict:
        """Increment mean, variance and lag-one correlation, each within ``margin`` standard errors."""
        out = {}
        for name, paths in (("A", self.A_paths), ("B", self.B_paths)):
            inc = np.diff(paths, axis=1).ravel()
            n = inc.size
            mean_z = inc.mean() / (np.sqrt(self.dt / n))
            var_z = (inc.var() - self.dt) / (self.dt * np.sqrt(2.0 / n))
            d = np.diff(paths, axis=1)
            lag = (d[:, 1:] * d[:, :-1]).mean() / self.dt
            lag_z = lag * np.sqrt(d[:, 1:].size)
            out[name] = {"mean_z": float(mean_z), "var_z": float(var_z), "lag1_z": float(lag_z)}
        out["pass"] = bool(all(abs(v) <= margin for k in ("A", "B") for v in out[k].values()))
        return out

    def save(self, directory) -> Path:
        """``A.npy``, ``B.npy`` and an ``ensemble.json`` sidecar."""
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        np.save(d / "A.npy", self.A_paths)
        np.save(d / "B.npy", self.B_paths)
        meta = {"seed": self.seed, "t": self.t, "dt": self.dt, "steps": self.steps,
                "m1": self.m1, "m2": self.m2, "kind": self.kind}
        (d / "ensemble.json").write_text(json.dumps(meta, indent=2, sort_keys=True))
        return d

    @classmethod
    def load(cls, directory) -> "BrownianProductEnsemble":
        d = Path(directory)
        meta = json.loads((d / "ensemble.json").read_text())
        a, b = np.load(d / "A.npy"), np.load(d / "B.npy")
        if a.shape != (meta["m1"], meta["steps"] + 1) or b.shape != (meta["m2"], meta["steps"] + 1):
            raise ProbabilityError("path files do not match the sidecar counts")
        return cls(a, b, float(meta["t"]), meta["seed"], meta.get("kind", "gaussian"))


# --------------------------------------------------------------------------
# martingale pairs
# --------------------------------------------------------------------------

_FACTORS = ("one", "sign_terminal")


@dataclass(frozen=True)
class MartingalePairSpec:
    """``X_s = a_s(w1) v(w2)`` and ``Y_s = u(w1) b_s(w2)``.

    ``a`` is ``A`` or the constant 1 (``x_path``), ``b`` likewise; ``u`` and ``v``
    are the constant 1 or the sign of the terminal value of the other factor's
    path. ``X`` is then a martingale for ``sigma(A up to s) v sigma(B)`` and ``Y``
    for the mirrored filtration.
    """

    x_path: str = "brownian"
    y_path: str = "brownian"
    U: str = "sign_terminal"
    V: str = "sign_terminal"

    def __post_init__(self):
        for p in (self.x_path, self.y_path):
            if p not in ("brownian", "one"):
                raise ProbabilityError(f"path rule must be 'brownian' or 'one', got {p!r}")
        for f in (self.U, self.V):
            if f not in _FACTORS:
                raise ProbabilityError(f"factor rule must be one of {_FACTORS}")

    @classmethod
    def example(cls) -> "MartingalePairSpec":
        return cls()

    @classmethod
    def brownian_only(cls) -> "MartingalePairSpec":
        """``X = A``, ``Y = 1``."""
        return cls("brownian", "one", "one", "one")

    @staticmethod
    def _factor(rule: str, paths: np.ndarray) -> np.ndarray:
        return np.ones(paths.shape[0]) if rule == "one" else np.sign(paths[:, -1])

    def X(self, ens: BrownianProductEnsemble, i: int) -> np.ndarray:
        a = ens.A_paths[:, i] if self.x_path == "brownian" else np.ones(ens.m1)
        return np.outer(a, self._factor(self.V, ens.B_paths))

    def Y(self, ens: BrownianProductEnsemble, i: int) -> np.ndarray:
        b = ens.B_paths[:, i] if self.y_path == "brownian" else np.ones(ens.m2)
        return np.outer(self._factor(self.U, ens.A_paths), b)

    def XY(self, ens: BrownianProductEnsemble, i: int) -> np.ndarray:
        return self.X(ens, i) * self.Y(ens, i)

    def validate(self, ens: BrownianProductEnsemble, checkpoints: int = 4,
                 margin: float = SIGMA_MARGIN) -> dict:
        """Martingale tests: increments over coarse windows are uncorrelated with past information.

        For ``X``, the past test functions are 1, ``X_s`` and ``sign(A_s)`` (which
        together with the ``B``-side factor span the relevant directions); the
        mean of ``(X_t - X_s) h`` must be within ``margin`` standard errors of 0.
        """
        idx = np.linspace(0, ens.steps, checkpoints + 1).astype(int)
        worst = 0.0
        for which in ("X", "Y"):
            proc = self.X if which == "X" else self.Y
            own = ens.A_paths if which == "X" else ens.B_paths
            for s, t in zip(idx[:-1], idx[1:]):
                inc = proc(ens, t) - proc(ens, s)
                past = own[:, s]
                tests = [np.ones(ens.shape), proc(ens, s),
                         (np.sign(past)[:, None] if which == "X" else np.sign(past)[None, :])
                         * np.ones(ens.shape)]
                for h in tests:
                    prod = inc * h
                    se = _crossed_se(prod)
                    if se > 0:
                        worst = max(worst, abs(prod.mean()) / se)
        return {"max_z": float(worst), "pass": bool(worst <= margin)}

    def moment_doubling(self, ens: BrownianProductEnsemble, tol: float = 2.0) -> dict:
        """Empirical ``E X_t^4`` and ``E Y_t^4`` on half and full ensembles; ratio must stay below ``tol``."""
        half = ens.subset(max(1, ens.m1 // 2), max(1, ens.m2 // 2))
        out = {}
        for which in ("X", "Y"):
            proc = self.X if which == "X" else self.Y
            m_half = float((proc(half, half.steps) ** 4).mean())
            m_full = float((proc(ens, ens.steps) ** 4).mean())
            ratio = max(m_half, m_full) / min(m_half, m_full) if min(m_half, m_full) > 0 else (
                1.0 if m_half == m_full else np.inf)
            out[which] = {"half": m_half, "full": m_full, "ratio": ratio}
        out["pass"] = bool(all(out[w]["ratio"] < tol for w in ("X", "Y")))
        return out


def _crossed_se(values: np.ndarray) -> float:
    """Standard error of the mean of an ``(m1, m2)`` array with independent row and column effects."""
    m1, m2 = values.shape
    rows = values.mean(axis=1)
    cols = values.mean(axis=0)
    v = 0.0
    if m1 > 1:
        v += rows.var(ddof=1) / m1
    if m2 > 1:
        v += cols.var(ddof=1) / m2
    return float(np.sqrt(v))


# --------------------------------------------------------------------------
# elementary integrands
# --------------------------------------------------------------------------

Rule = Callable[[int, np.ndarray, np.ndarray], "np.ndarray | float"]


def dyadic_times(n: int, steps: int) -> tuple[int, ...]:
    """Grid indices of the uniform partition of ``[0, t]`` into ``n`` pieces."""
    if n < 1 or steps % n:
        raise ProbabilityError(f"{n} pieces do not divide {steps} steps")
    return tuple(range(0, steps + 1, steps // n))


@dataclass(frozen=True)
class ElementaryProcess:
    """``H = K_{k-1}`` on ``(t_{k-1}, t_k]``.

    ``rule(k, A_window, B_window)`` returns ``K_k``; it only ever receives the
    paths up to time ``t_k`` (``K_{-1}`` sees the time-0 column), so predictability
    holds by construction. The result is broadcast to ``(m1, m2)``.
    """

    times: tuple[int, ...]
    rule: Rule = field(compare=False)

    def __post_init__(self):
        t = tuple(int(x) for x in self.times)
        if len(t) < 2 or t[0] != 0 or any(b <= a for a, b in zip(t, t[1:])):
            raise ProbabilityError("partition times must start at 0 and increase strictly")
        object.__setattr__(self, "times", t)

    @property
    def n(self) -> int:
        return len(self.times) - 1

    @classmethod
    def constant(cls, c: float, times) -> "ElementaryProcess":
        return cls(tuple(times), lambda k, a, b: c)

    @classmethod
    def riemann(cls, target: Callable[[np.ndarray, np.ndarray], np.ndarray], times) -> "ElementaryProcess":
        """Left-point approximation of a predictable target ``h_s = target(A_{[0,s]}, B_{[0,s]})``."""
        return cls(tuple(times), lambda k, a, b: target(a, b))

    def K(self, k: int, ens: BrownianProductEnsemble) -> np.ndarray:
        i = 0 if k < 0 else self.times[k]
        a = ens.A_paths[:, : i + 1]
        b = ens.B_paths[:, : i + 1]
        return np.broadcast_to(np.asarray(self.rule(k, a, b), dtype=float), ens.shape)

    def values(self, ens: BrownianProductEnsemble) -> list[np.ndarray]:
        """``K_0, ..., K_{n-1}``."""
        if self.times[-1] != ens.steps:
            raise ProbabilityError("partition must end at the ensemble horizon")
        return [self.K(k, ens) for k in range(self.n)]

    def refine(self, extra) -> "ElementaryProcess":
        """Insert partition points; ``K`` on each new piece is the enclosing old ``K``."""
        new = tuple(sorted(set(self.times) | {int(x) for x in extra}))
        if new[0] != 0 or new[-1] != self.times[-1]:
            raise ProbabilityError("inserted points must lie inside the partition")
        old = np.asarray(self.times)
        parent = [int(np.searchsorted(old, s, side="right") - 1) for s in new[:-1]]
        rule = self.rule
        base = self.times

        def refined(k, a, b):
            if k < 0:
                return rule(-1, a, b)
            j = parent[k]
            return rule(j, a[:, : base[j] + 1], b[:, : base[j] + 1])

        return ElementaryProcess(new, refined)

    def combine(self, other: "ElementaryProcess", a: float = 1.0, b: float = -1.0) -> "ElementaryProcess":
        """``a H + b H'`` on the common refinement."""
        if self.times[-1] != other.times[-1]:
            raise ProbabilityError("processes have different horizons")
        union = sorted(set(self.times) | set(other.times))
        p, q = self.refine(union), other.refine(union)
        return ElementaryProcess(tuple(union),
                                 lambda k, x, y: a * np.asarray(p.rule(k, x, y))
                                 + b * np.asarray(q.rule(k, x, y)))


# --------------------------------------------------------------------------
# integral and seminorm
# --------------------------------------------------------------------------


def stochastic_integral(H: ElementaryProcess, spec: MartingalePairSpec,
                        ens: BrownianProductEnsemble) -> np.ndarray:
    """``sum_k K_{k-1} (X_{t_k} Y_{t_k} - X_{t_{k-1}} Y_{t_{k-1}})`` per outcome."""
    K = H.values(ens)
    xy = [spec.XY(ens, i) for i in H.times]
    out = np.zeros(ens.shape)
    for k in range(1, H.n + 1):
        out += K[k - 1] * (xy[k] - xy[k - 1])
    return out


def _increment_sums(H, spec, ens):
    K = H.values(ens)
    x = [spec.X(ens, i) for i in H.times]
    y = [spec.Y(ens, i) for i in H.times]
    sx = sum(K[k - 1] ** 2 * (x[k] - x[k - 1]) ** 2 for k in range(1, H.n + 1))
    sy = sum(K[k - 1] ** 2 * (y[k] - y[k - 1]) ** 2 for k in range(1, H.n + 1))
    kx = sum(K[k - 1] * (x[k] - x[k - 1]) for k in range(1, H.n + 1))
    ky = sum(K[k - 1] * (y[k] - y[k - 1]) for k in range(1, H.n + 1))
    return K, x, y, sx, sy, kx, ky


def seminorm(H: ElementaryProcess, spec: MartingalePairSpec, ens: BrownianProductEnsemble) -> float:
    """``(E sum K^2 (dX)^2 + E sum K^2 (dY)^2)^{1/2}``."""
    _, _, _, sx, sy, _, _ = _increment_sums(H, spec, ens)
    return float(np.sqrt(np.mean(sx) + np.mean(sy)))


def isometry_gap(H: ElementaryProcess, spec: MartingalePairSpec, ens: BrownianProductEnsemble) -> dict:
    """``|seminorm^2 - ||(K.X)||_2^2 - ||(K.Y)||_2^2|``; zero for exact martingale models."""
    _, _, _, sx, sy, kx, ky = _increment_sums(H, spec, ens)
    lhs = float(np.mean(sx) + np.mean(sy))
    rhs = float(np.mean(kx * kx) + np.mean(ky * ky))
    return {"seminorm_sq": lhs, "transform_sq": rhs, "gap": abs(lhs - rhs),
            "relative": abs(lhs - rhs) / lhs if lhs > 0 else 0.0}


def representation_gap(H: ElementaryProcess, spec: MartingalePairSpec, ens: BrownianProductEnsemble,
                       extra=None) -> dict:
    """Insert redundant partition points (default: all midpoints) and compare integral and seminorm."""
    if extra is None:
        extra = [(a + b) // 2 for a, b in zip(H.times, H.times[1:]) if b - a > 1]
    R = H.refine(extra)
    i1, i2 = stochastic_integral(H, spec, ens), stochastic_integral(R, spec, ens)
    s1, s2 = seminorm(H, spec, ens), seminorm(R, spec, ens)
    return {"integral_gap": float(np.max(np.abs(i1 - i2))), "seminorm_gap": abs(s1 - s2),
            "seminorm_sq_gap": abs(s1 * s1 - s2 * s2), "seminorm": s1, "refined_points": len(extra)}


def bdg_constant(spec: MartingalePairSpec, ens: BrownianProductEnsemble, times) -> float:
    """Measured ``||(sum (dM)^2)^{1/2}||_4 / ||M_t - M_0||_4`` maximized over ``M = X, Y``."""
    best = 0.0
    for proc in (spec.X, spec.Y):
        vals = [proc(ens, i) for i in times]
        qv = np.sqrt(sum((vals[k] - vals[k - 1]) ** 2 for k in range(1, len(vals))))
        den = _norm(vals[-1] - vals[0], 4)
        if den > 0:
            best = max(best, _norm(qv, 4) / den)
    return best


def effective_constant(spec: MartingalePairSpec, ens: BrownianProductEnsemble, times) -> float:
    """``3/2`` for the two modified transforms plus the measured square-function constant."""
    return 1.5 + bdg_constant(spec, ens, times)


def corollary4_check(H: ElementaryProcess, spec: MartingalePairSpec, ens: BrownianProductEnsemble) -> dict:
    """``||int H d(XY)||_{4/3} / (||H|| (||X_t||_4 + ||Y_t||_4))`` and the splitting bounds behind it.

    ``cap`` is the uniform bound ``C (||X_t||_2^2 + ||Y_t||_2^2)^{1/2} (||X_t||_4 + ||Y_t||_4)``
    scaled by ``max |K|`` when that exceeds 1.
    """
    K, x, y, sx, sy, kx, ky = _increment_sums(H, spec, ens)
    integral = stochastic_integral(H, spec, ens)
    # discrete integration by parts, per outcome
    kxy = sum(K[k - 1] * x[k - 1] * (y[k] - y[k - 1]) for k in range(1, H.n + 1))
    kyx = sum(K[k - 1] * y[k - 1] * (x[k] - x[k - 1]) for k in range(1, H.n + 1))
    cov = sum(K[k - 1] * (x[k] - x[k - 1]) * (y[k] - y[k - 1]) for k in range(1, H.n + 1))
    split_gap = float(np.max(np.abs(integral - kxy - kyx - cov)))
    norm = float(np.sqrt(np.mean(sx) + np.mean(sy)))
    x4, y4 = _norm(x[-1], 4), _norm(y[-1], 4)
    lhs = _norm(integral, 4 / 3)
    if norm == 0 or x4 + y4 == 0:
        return {"skipped": True, "pass": True}
    C = effective_constant(spec, ens, H.times)
    x2, y2 = _norm(x[-1], 2), _norm(y[-1], 2)
    cap_K1 = C * np.sqrt(x2**2 + y2**2) * (x4 + y4)
    kmax = max(float(np.max(np.abs(k))) for k in K)
    return {
        "skipped": False,
        "ratio": lhs / (norm * (x4 + y4)),
        "integral_norm": lhs,
        "seminorm": norm,
        "C_eff": C,
        "split_gap": split_gap,
        "transform_ratio_X": _norm(kyx, 4 / 3) / (y4 * _norm(kx, 2)) if _norm(kx, 2) > 0 else 0.0,
        "transform_ratio_Y": _norm(kxy, 4 / 3) / (x4 * _norm(ky, 2)) if _norm(ky, 2) > 0 else 0.0,
        "cap": float(cap_K1 * max(kmax, 1.0)),
        "pass": bool(np.isfinite(lhs) and lhs <= C * norm * (x4 + y4) * (1 + 1e-9)),
    }


def refinement_study(target, spec: MartingalePairSpec, ens: BrownianProductEnsemble,
                     ns=(4, 8, 16, 32, 64)) -> dict:
    """Integral-to-seminorm ratios for Riemann approximations of ``target`` on dyadic partitions."""
    ratios = []
    for n in ns:
        r = corollary4_check(ElementaryProcess.riemann(target, dyadic_times(n, ens.steps)), spec, ens)
        ratios.append(r.get("ratio", 0.0))
    pos = [r for r in ratios if r > 0]
    spread = max(pos) / min(pos) if pos else 1.0
    return {"ns": list(ns), "ratios": ratios, "spread": spread, "pass": bool(spread < 3.0)}


def corollary3_check(spec: MartingalePairSpec, ens: BrownianProductEnsemble, trial_count: int,
                     rng: np.random.Generator, sizes=(4, 8, 16, 32)) -> dict:
    """Random elementary integrands with ``|K| <= 1`` against the uniform cap.

    Each trial picks a dyadic partition and one of three strategies: constant
    signs per interval, signs of a random combination of the current path
    values, or clipped current ``A`` times ``B``.
    """
    times_all = {n: dyadic_times(n, ens.steps) for n in sizes if ens.steps % n == 0}
    if not times_all:
        raise ProbabilityError("no admissible partition sizes")
    x4, y4 = _norm(spec.X(ens, ens.steps), 4), _norm(spec.Y(ens, ens.steps), 4)
    x2, y2 = _norm(spec.X(ens, ens.steps), 2), _norm(spec.Y(ens, ens.steps), 2)
    finest = max(times_all)
    C = effective_constant(spec, ens, times_all[finest])
    cap = C * np.sqrt(x2**2 + y2**2) * (x4 + y4)
    best = 0.0
    extremes = [_norm(stochastic_integral(ElementaryProcess.constant(c, times_all[finest]), spec, ens),
                      4 / 3) for c in (1.0, -1.0)]
    for _ in range(trial_count):
        n = list(times_all)[int(rng.integers(len(times_all)))]
        times = times_all[n]
        mode = int(rng.integers(3))
        if mode == 0:
            signs = rng.choice([-1.0, 1.0], size=n + 1)
            H = ElementaryProcess(times, lambda k, a, b, s=signs: s[k + 1])
        elif mode == 1:
            c1, c2, c3 = rng.standard_normal(3)
            H = ElementaryProcess(times, lambda k, a, b, c=(c1, c2, c3):
                                  np.sign(c[0] * a[:, -1][:, None] + c[1] * b[:, -1][None, :] + c[2]))
        else:
            H = ElementaryProcess(times, lambda k, a, b: np.clip(
                a[:, -1][:, None] * b[:, -1][None, :], -1.0, 1.0))
        best = max(best, _norm(stochastic_integral(H, spec, ens), 4 / 3))
    top = max(best, *extremes)
    return {"trials": trial_count, "max_norm": top, "extremes": extremes, "cap": float(cap),
            "C_eff": C, "pass": bool(top <= cap)}


def clipped_A(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Predictable target ``clip(A_s, -1, 1)`` as a function of the path windows."""
    return np.clip(a[:, -1], -1.0, 1.0)[:, None]


def cauchy_convergence(H_sequence, spec: MartingalePairSpec, ens: BrownianProductEnsemble) -> dict:
    """``||int H_j - int H_{j+1}||_{4/3}`` with the seminorm bound for each consecutive pair."""
    H_sequence = list(H_sequence)
    if len(H_sequence) < 2:
        raise ProbabilityError("need at least two integrands")
    x4, y4 = _norm(spec.X(ens, ens.steps), 4), _norm(spec.Y(ens, ens.steps), 4)
    finest = max(H_sequence, key=lambda h: h.n).times
    C = effective_constant(spec, ens, finest)
    dist, bounds = [], []
    ints = [stochastic_integral(h, spec, ens) for h in H_sequence]
    for j in range(len(H_sequence) - 1):
        dist.append(_norm(ints[j] - ints[j + 1], 4 / 3))
        diff = H_sequence[j].combine(H_sequence[j + 1])
        bounds.append(C * seminorm(diff, spec, ens) * (x4 + y4))
    decreasing = all(b < a for a, b in zip(dist, dist[1:]))
    dominated = all(d <= b * (1 + 1e-9) for d, b in zip(dist, bounds))
    return {"distances": dist, "bounds": bounds, "C_eff": C, "decreasing": bool(decreasing),
            "dominated": bool(dominated), "pass": bool(decreasing and dominated)}


# --------------------------------------------------------------------------
# non-adaptedness
# --------------------------------------------------------------------------


def _sign_given_past(value: np.ndarray, remaining: float) -> np.ndarray:
    """``E(sign W_t | W_s = value) = 2 Phi(value / sqrt(t - s)) - 1`` for Brownian ``W``."""
    return 2.0 * special.ndtr(value / np.sqrt(remaining)) - 1.0


def _analytic_residual(eps: float, t: float, sign_u: bool, sign_v: bool) -> float:
    """``E(X_e Y_e)^2 - E(E(X_e Y_e | H_e))^2`` for the Brownian model."""
    def cond_sq(flag):
        if not flag:
            return eps
        f = lambda z: (eps * z * z * _sign_given_past(np.sqrt(eps) * z, t - eps) ** 2
                       * np.exp(-z * z / 2) / np.sqrt(2 * np.pi))
        return integrate.quad(f, -np.inf, np.inf)[0]

    return eps * eps - cond_sq(sign_u) * cond_sq(sign_v)


def nonadapted_demo(ens: BrownianProductEnsemble, epsilon_index: int | None = None,
                    spec: MartingalePairSpec | None = None) -> dict:
    """Residual variance of ``X_e Y_e`` around its conditional expectation given both paths up to ``e``.

    The conditional expectation uses the Brownian transition law for the terminal
    signs, so the estimate does not depend on the (discrete) empirical filtration.
    """
    spec = spec or MartingalePairSpec.example()
    if spec.x_path != "brownian" or spec.y_path != "brownian":
        raise ProbabilityError("the demo needs Brownian path factors")
    i = ens.steps // 8 if epsilon_index is None else int(epsilon_index)
    if not 0 < i < ens.steps:
        raise ProbabilityError("epsilon must lie strictly inside the horizon")
    eps = i * ens.dt
    rem = ens.t - eps
    a, b = ens.A_paths[:, i], ens.B_paths[:, i]
    u = np.sign(ens.A_paths[:, -1]) if spec.U == "sign_terminal" else np.ones(ens.m1)
    v = np.sign(ens.B_paths[:, -1]) if spec.V == "sign_terminal" else np.ones(ens.m2)
    cu = _sign_given_past(a, rem) if spec.U == "sign_terminal" else np.ones(ens.m1)
    cv = _sign_given_past(b, rem) if spec.V == "sign_terminal" else np.ones(ens.m2)
    xy = np.outer(a * u, b * v)
    cond = np.outer(a * cu, b * cv)
    sq = (xy - cond) ** 2
    residual = float(sq.mean())
    se = _crossed_se(sq)
    analytic = _analytic_residual(eps, ens.t, spec.U == "sign_terminal", spec.V == "sign_terminal")
    margin = residual / se if se > 0 else (np.inf if residual > 0 else 0.0)
    corr = np.corrcoef(xy.ravel(), cond.ravel())[0, 1] if cond.std() > 0 and xy.std() > 0 else 1.0
    return {
        "epsilon": eps,
        "residual": residual,
        "se": se,
        "margin_se": float(margin),
        "analytic": float(analytic),
        "variance": float(xy.var()),
        "corr": float(corr),
        "pass": bool(margin >= SIGMA_MARGIN),
    }


def quadratic_variation_demo(ens: BrownianProductEnsemble, epsilon_index: int | None = None) -> dict:
    """For ``X = A, Y = 1``: realized quadratic variation on ``[0, e]`` and total variation under refinement."""
    i = ens.steps // 8 if epsilon_index is None else int(epsilon_index)
    inc = np.diff(ens.A_paths[:, : i + 1], axis=1)
    qv = float((inc**2).sum(axis=1).mean())
    tv = {}
    stride = 1
    while stride <= i:
        sub = ens.A_paths[:, : i + 1 : stride]
        tv[i // stride] = float(np.abs(np.diff(sub, axis=1)).sum(axis=1).mean())
        stride *= 2
    return {"epsilon": i * ens.dt, "quadratic_variation": qv, "total_variation": tv}


__all__ = [
    "BrownianProductEnsemble",
    "ElementaryProcess",
    "MartingalePairSpec",
    "bdg_constant",
    "cauchy_convergence",
    "clipped_A",
    "corollary3_check",
    "corollary4_check",
    "dyadic_times",
    "effective_constant",
    "isometry_gap",
    "nonadapted_demo",
    "quadratic_variation_demo",
    "refinement_study",
    "representation_gap",
    "seminorm",
    "stochastic_integral",
]
