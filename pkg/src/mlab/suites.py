"""Verification suites shared by the command line runner and the acceptance tests.

Each suite returns a :class:`SuiteResult`: a JSON-safe summary, CSV tables and
serialized failing instances. Per-instance checks are separate functions so a
failure artifact can be replayed on its own.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import paraproduct as pp
from . import stochastic as st
from .bellman import dual_pairing, proof_chain_check, telescoping_margin
from .estimates import (
    BellmanTrace,
    ExponentTriple,
    build_stopping,
    doob_check,
    interleaved_dyadic_pair,
    interval_cover_count,
    level_interval_checks,
    search_constant,
    theorem1b_constant,
)
from .fuzz import (
    dyadic_filtration,
    inputs_from_json,
    inputs_to_json,
    random_dims,
    random_inputs,
    random_values,
    trial_rng,
)
from .probspace import (
    EXACT_MAX_OUTCOMES,
    FiniteProbSpace,
    ProbabilityError,
    ProductFiltrationPair,
    check_commuting,
    fiber_projection_gaps,
    increment_product_gap,
    nested_average_gap,
)
from .transform import (
    MartingaleInputs,
    ito_isometry_gap,
    splitting_residual,
    uniform_growth_constant,
)

SUITES = ("identities", "bellman", "estimates", "paraproduct", "stochastic")
FLOAT_GAP = 1e-12
TOL = 1e-10
DEFAULT_EXPONENTS = ExponentTriple(3.0, 3.0, 1.5)
# fiber sums are quadruple sums over atoms; keep them at desk scale
MAX_SIDE = 16
MAX_HORIZON = 6


@dataclass
class ExperimentConfig:
    suite: str
    seed: int = 0
    exact: bool = False
    dims: tuple[int, int] | None = None
    n: int | None = None
    depth: int | None = None
    exponents: ExponentTriple = DEFAULT_EXPONENTS
    trials: int | None = None
    out: Path | None = None
    paths: tuple[int, int] = (256, 256)
    dt: float = 1.0 / 1024

    def validate(self) -> None:
        if self.suite not in SUITES + ("all",):
            raise ProbabilityError(f"unknown suite {self.suite!r}")
        if self.dims is not None:
            if min(self.dims) < 1 or max(self.dims) > MAX_SIDE:
                raise ProbabilityError(f"dims must be in 1..{MAX_SIDE} per factor")
            if self.exact and self.dims[0] * self.dims[1] > EXACT_MAX_OUTCOMES:
                raise ProbabilityError(f"exact mode is limited to {EXACT_MAX_OUTCOMES} outcomes")
        if self.n is not None and not 1 <= self.n <= MAX_HORIZON:
            raise ProbabilityError(f"--n must be in 1..{MAX_HORIZON}")
        if self.depth is not None and not 1 <= self.depth <= 8:
            raise ProbabilityError("--depth must be in 1..8")
        if self.trials is not None and self.trials < 1:
            raise ProbabilityError("--trials must be positive")
        if min(self.paths) < 2:
            raise ProbabilityError("--paths needs at least 2 paths per factor")
        steps = 1.0 / self.dt if self.dt > 0 else 0.0
        if not (self.dt > 0 and abs(steps - round(steps)) < 1e-9 and round(steps) % 64 == 0):
            raise ProbabilityError("--dt must be 1/steps with steps a multiple of 64")

    @property
    def steps(self) -> int:
        return int(round(1.0 / self.dt))


@dataclass
class SuiteResult:
    name: str
    summary: dict
    tables: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return bool(self.summary.get("pass", False)) and not self.failures


def jsonable(v):
    """Convert numpy scalars, Fractions and tuples for ``json.dumps``."""
    if isinstance(v, dict):
        return {str(k): jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [jsonable(x) for x in v]
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else int(v.numerator)
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating, float)):
        f = float(v)
        if math.isnan(f):
            return "nan"
        if math.isinf(f):
            return "inf" if f > 0 else "-inf"
        return f
    if isinstance(v, np.ndarray):
        return jsonable(v.tolist())
    return v


def _gap_ok(gap, exact: bool) -> bool:
    return gap == 0 if exact else float(gap) <= FLOAT_GAP


def _horizon(cfg: ExperimentConfig, rng, hi: int = 4) -> int:
    return cfg.n if cfg.n is not None else int(rng.integers(1, hi + 1))


def _dims(cfg: ExperimentConfig, rng, hi: int = 6):
    return cfg.dims if cfg.dims is not None else random_dims(rng, hi)


def _failure(suite, cfg, trial, inputs, report):
    return {"suite": suite, "seed": cfg.seed, "trial": trial, "exact": cfg.exact,
            "exponents": [cfg.exponents.p, cfg.exponents.q, cfg.exponents.r],
            "report": jsonable(report), "instance": inputs_to_json(inputs)}


def _aux_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(trial), 1]))


# --------------------------------------------------------------------------
# identities
# --------------------------------------------------------------------------


def identity_checks(inputs: MartingaleInputs, rng: np.random.Generator) -> dict:
    """Exact identities: splitting, Ito isometry, nested, fiber and increment-product averages, dual pairing."""
    pair = inputs.pair
    N = inputs.horizon
    exact = pair.exact
    n1, n2 = pair.shape
    gaps = {}
    gaps["splitting"] = max((splitting_residual(inputs, n) for n in range(1, N + 1)), default=0)
    gaps["ito_isometry"] = max((max(ito_isometry_gap(inputs, n, "X"), ito_isometry_gap(inputs, n, "Y"))
                                for n in range(1, N + 1)), default=0)
    g_nested = 0
    for filt, sp, size in ((pair.filt1, pair.space1, n1), (pair.filt2, pair.space2, n2)):
        for k in range(N + 1):
            v = random_values((size, size), rng, exact)
            g_nested = max(g_nested, nested_average_gap(filt, sp.mass, k, v))
    gaps["nested_average"] = g_nested
    g_fiber = 0
    kls = [(k, k) for k in range(N + 1)] + [tuple(int(x) for x in rng.integers(0, N + 1, size=2))]
    for k, l in kls:
        w = random_values(pair.shape, rng, exact)
        g_fiber = max(g_fiber, max(fiber_projection_gaps(pair, w, k, l).values()))
    gaps["fiber_projection"] = g_fiber
    g_incr = 0
    for filt, sp, size in ((pair.filt1, pair.space1, n1), (pair.filt2, pair.space2, n2)):
        for k in range(N):
            u1, u2 = random_values(size, rng, exact), random_values(size, rng, exact)
            g_incr = max(g_incr, increment_product_gap(filt, sp.mass, k, u1, u2))
    gaps["increment_product"] = g_incr
    gaps["dual_pairing"] = dual_pairing(inputs, N)["gap"]
    if not exact:
        c = check_commuting(pair, int(rng.integers(0, N + 1)), int(rng.integers(0, N + 1)), 4, rng)
        gaps["commuting"] = c["max"]
    ok = all(_gap_ok(g, exact) for g in gaps.values())
    return {"gaps": {k: float(v) for k, v in gaps.items()}, "pass": bool(ok)}


def run_identities(cfg: ExperimentConfig) -> SuiteResult:
    trials = cfg.trials or 500
    worst: dict = {}
    failures = []
    rows = []
    for i in range(trials):
        rng = trial_rng(cfg.seed, i)
        N = _horizon(cfg, rng)
        inputs = random_inputs(rng, _dims(cfg, rng), N, exact=cfg.exact,
                               with_K=bool(rng.integers(2)))
        r = identity_checks(inputs, _aux_rng(cfg.seed, i))
        for k, v in r["gaps"].items():
            worst[k] = max(worst.get(k, 0.0), v)
        rows.append([i, *inputs.pair.shape, N, max(r["gaps"].values()), int(r["pass"])])
        if not r["pass"]:
            failures.append(_failure("identities", cfg, i, inputs, r))
    summary = {"trials": trials, "exact": cfg.exact, "max_gaps": worst,
               "tolerance": 0 if cfg.exact else FLOAT_GAP, "failures": len(failures),
               "pass": not failures}
    tables = {"identities": (["trial", "n1", "n2", "horizon", "max_gap", "pass"], rows)}
    return SuiteResult("identities", summary, tables, failures)


# --------------------------------------------------------------------------
# Bellman control process
# --------------------------------------------------------------------------


def bellman_checks(inputs: MartingaleInputs) -> dict:
    """Proof chain at every step, telescoped drift and the dual ratio."""
    exact = inputs.pair.exact
    margins: dict = {}
    gaps: dict = {}
    ok = True
    for k in range(inputs.horizon):
        r = proof_chain_check(inputs, k)
        ok &= r["pass"]
        for name, v in r["margins"].items():
            margins[name] = min(margins.get(name, math.inf), v)
        for name, v in r["gaps"].items():
            gaps[name] = max(gaps.get(name, 0.0), v)
    tele = float(telescoping_margin(inputs))
    dual = dual_pairing(inputs)
    ok &= (tele >= 0) if exact else (tele >= -TOL)
    ok &= dual["pass"]
    return {"margins": margins, "gaps": gaps, "telescoping": tele, "dual_ratio": dual["ratio"],
            "dual_gap": float(dual["gap"]), "pass": bool(ok)}


def nonvacuity_instance() -> MartingaleInputs:
    """``X = 1``, ``Y`` a Rademacher variable in the second factor revealed at step 1, ``Z = Y``.

    Then ``(X.Y)_1 = Y`` and the dual ratio is exactly 1.
    """
    from .probspace import Filtration, Partition

    sp1 = FiniteProbSpace.uniform(1, exact=True)
    sp2 = FiniteProbSpace.uniform(2, exact=True)
    f1 = Filtration((Partition.trivial(1), Partition.trivial(1)))
    f2 = Filtration((Partition.trivial(2), Partition.discrete(2)))
    pair = ProductFiltrationPair(sp1, sp2, f1, f2)
    y = np.array([[1, -1]])
    return MartingaleInputs(pair, np.ones((1, 2), dtype=int), y, y)


def run_bellman(cfg: ExperimentConfig) -> SuiteResult:
    trials = cfg.trials or 1000
    margins: dict = {}
    gaps: dict = {}
    failures = []
    rows = []
    worst_ratio = 0.0
    tele = math.inf
    for i in range(trials):
        rng = trial_rng(cfg.seed, i)
        N = _horizon(cfg, rng)
        dims = _dims(cfg, rng, 5)
        inputs = random_inputs(rng, dims, N, exact=cfg.exact, with_K=bool(rng.integers(2)),
                               heavy=bool(rng.integers(2)) and not cfg.exact)
        r = bellman_checks(inputs)
        for k, v in r["margins"].items():
            margins[k] = min(margins.get(k, math.inf), v)
        for k, v in r["gaps"].items():
            gaps[k] = max(gaps.get(k, 0.0), v)
        tele = min(tele, r["telescoping"])
        worst_ratio = max(worst_ratio, r["dual_ratio"])
        rows.append([i, *inputs.pair.shape, N, min(r["margins"].values(), default=0.0),
                     r["dual_ratio"], int(r["pass"])])
        if not r["pass"]:
            failures.append(_failure("bellman", cfg, i, inputs, r))
    nv = dual_pairing(nonvacuity_instance())
    summary = {"trials": trials, "exact": cfg.exact, "min_margins": margins, "max_gaps": gaps,
               "min_telescoping": tele, "max_dual_ratio": worst_ratio, "dual_bound": 1.5,
               "nonvacuity_ratio": nv["ratio"], "failures": len(failures),
               "pass": bool(not failures and worst_ratio <= 1.5 + 1e-9 and nv["ratio"] >= 0.5)}
    tables = {"bellman": (["trial", "n1", "n2", "horizon", "min_margin", "dual_ratio", "pass"], rows)}
    return SuiteResult("bellman", summary, tables, failures)


# --------------------------------------------------------------------------
# stopping times and the constant
# --------------------------------------------------------------------------


def estimate_checks(inputs: MartingaleInputs, exponents: ExponentTriple) -> dict:
    trace = BellmanTrace(inputs)
    data = build_stopping(inputs, trace)
    cover = interval_cover_count(data)
    cover_ok = bool(np.all(cover == 1))
    levels = level_interval_checks(inputs, trace, data)
    doob = doob_check(inputs, exponents)
    th = theorem1b_constant(inputs, exponents)
    ok = cover_ok and levels["pass"] and doob["pass"] and th["pass"]
    return {"cover": cover_ok, "max_margin0": levels["max_margin0"],
            "max_margin1": levels["max_margin1"], "max_cap_margin": levels["max_cap_margin"],
            "intervals": levels["intervals"], "doob": doob["pass"],
            "direct": th.get("direct", 0.0), "pass": bool(ok)}


def uniform_dyadic_pair(depth: int, exact: bool = True) -> ProductFiltrationPair:
    """Uniform ``2^depth x 2^depth`` space with dyadic filtrations in both factors."""
    f = dyadic_filtration(depth)
    sp = FiniteProbSpace.uniform(2**depth, exact=exact)
    return ProductFiltrationPair(sp, sp, f, f)


def run_estimates(cfg: ExperimentConfig) -> SuiteResult:
    trials = cfg.trials or 200
    failures = []
    worst0 = worst1 = -math.inf
    cover_ok = True
    for i in range(trials):
        rng = trial_rng(cfg.seed, i)
        N = _horizon(cfg, rng)
        inputs = random_inputs(rng, _dims(cfg, rng, 5), N, exact=cfg.exact,
                               with_K=bool(rng.integers(2)))
        r = estimate_checks(inputs, cfg.exponents)
        cover_ok &= r["cover"]
        worst0 = max(worst0, r["max_margin0"])
        worst1 = max(worst1, r["max_margin1"])
        if not r["pass"]:
            failures.append(_failure("estimates", cfg, i, inputs, r))
    A_dyadic = uniform_growth_constant(uniform_dyadic_pair(cfg.depth or 2))
    # constant measurement on the interleaved dyadic 8x8 filtration
    rows = []
    consts = {}
    for n in range(2, 7):
        res = search_constant(interleaved_dyadic_pair(n), n, cfg.exponents,
                              trial_rng(cfg.seed, 10_000 + n), restarts=8)
        consts[n] = res["C"]
        e = cfg.exponents
        rows.append([e.p, e.q, e.r, n, "8x8", res["A"], res["C"]])
        if not res["bounds_hold"]:
            failures.append({"suite": "estimates", "seed": cfg.seed, "trial": f"constant-n{n}",
                             "report": jsonable({k: v for k, v in res.items() if k not in ("X", "Y")})})
    drift = abs(consts[6] - consts[5]) / consts[5] if consts[5] > 0 else math.inf
    summary = {
        "trials": trials, "cover": cover_ok, "max_margin0": worst0, "max_margin1": worst1,
        "A_uniform_dyadic": A_dyadic, "constants": consts, "drift_5_6": drift,
        "failures": len(failures),
        "pass": bool(not failures and cover_ok and A_dyadic == 4 and drift < 0.2
                     and all(np.isfinite(v) for v in consts.values())),
    }
    tables = {"constants": (["p", "q", "r", "n", "dims", "A", "C"], rows)}
    return SuiteResult("estimates", summary, tables, failures)


# --------------------------------------------------------------------------
# paraproducts
# --------------------------------------------------------------------------


def paraproduct_checks(f, g, grid: pp.DyadicGrid2D) -> dict:
    worst_gap = 0.0
    worst_excess = -math.inf
    for kern in ("box", "triangle"):
        for n in range(grid.depth + 1):
            r = pp.difference_decomposition_check(f, g, grid, n, kern)
            worst_gap = max(worst_gap, r["gap"])
            worst_excess = max(worst_excess, r["majorant_excess"])
    c = 1.75
    tele = pp.martingale_paraproduct(np.full(grid.shape, c), g, grid)
    expect = c * (grid.cond_y(g, grid.depth) - grid.cond_y(g, 0))
    tele_gap = float(np.max(np.abs(tele - expect)))
    comm = pp.commuting_gap(f, grid)
    return {"gap": worst_gap, "majorant_excess": worst_excess, "telescoping_gap": tele_gap,
            "commuting_gap": comm,
            "pass": bool(worst_gap <= TOL and worst_excess <= TOL and tele_gap <= FLOAT_GAP
                         and comm <= FLOAT_GAP)}


def norm_ratio_profile(exponents: ExponentTriple, depths, samples: int, seed: int,
                       operator: str = "twisted", kernels="triangle") -> dict:
    """Max norm ratio per depth over a fixed family of continuum test functions.

    Sample ``s`` draws the same pair of rectangle-indicator sums at every depth,
    so the profile tracks one set of functions under grid refinement.
    """
    out = {}
    for d in depths:
        grid = pp.DyadicGrid2D(d)
        best = 0.0
        for s in range(samples):
            rng = trial_rng(seed, 20_000 + s)
            f = pp.sample_continuum(pp.random_rectangles(rng), grid)
            g = pp.sample_continuum(pp.random_rectangles(rng), grid)
            best = max(best, pp.norm_ratio(f, g, exponents, grid, operator, kernels))
        out[d] = best
    return out


def run_paraproduct(cfg: ExperimentConfig) -> SuiteResult:
    trials = cfg.trials or 100
    depth = cfg.depth or 3
    grid = pp.DyadicGrid2D(depth)
    failures = []
    worst = {"gap": 0.0, "majorant_excess": -math.inf, "telescoping_gap": 0.0, "commuting_gap": 0.0}
    for i in range(trials):
        rng = trial_rng(cfg.seed, i)
        f = random_values(grid.shape, rng, heavy=bool(rng.integers(2)))
        g = random_values(grid.shape, rng, heavy=bool(rng.integers(2)))
        r = paraproduct_checks(f, g, grid)
        for k in worst:
            worst[k] = max(worst[k], r[k])
        if not r["pass"]:
            failures.append({"suite": "paraproduct", "seed": cfg.seed, "trial": i, "depth": depth,
                             "report": jsonable(r), "f": f.tolist(), "g": g.tolist()})
    depths = (3, 4, 5, 6)
    samples = max(8, min(trials, 40))
    rows = []
    profiles = {}
    for op in ("twisted", "martingale"):
        prof = norm_ratio_profile(cfg.exponents, depths, samples, cfg.seed, op)
        profiles[op] = prof
        e = cfg.exponents
        rows += [[op, e.p, e.q, e.r, d, v] for d, v in prof.items()]
    drifts = {op: abs(p[6] - p[5]) / p[5] if p[5] > 0 else math.inf for op, p in profiles.items()}
    A_grid = uniform_growth_constant(grid.pair)
    summary = {"trials": trials, "depth": depth, **worst, "norm_ratios": profiles,
               "drift_5_6": drifts, "A_grid": A_grid, "failures": len(failures),
               "pass": bool(not failures and all(d < 0.2 for d in drifts.values())
                            and all(np.isfinite(v) for p in profiles.values() for v in p.values()))}
    tables = {"norm_ratio": (["operator", "p", "q", "r", "depth", "max_ratio"], rows)}
    return SuiteResult("paraproduct", summary, tables, failures)


# --------------------------------------------------------------------------
# stochastic integral
# --------------------------------------------------------------------------


def run_stochastic(cfg: ExperimentConfig) -> SuiteResult:
    m1, m2 = cfg.paths
    ens = st.BrownianProductEnsemble.generate(m1, m2, cfg.steps, 1.0, cfg.seed)
    spec = st.MartingalePairSpec.example()
    valid = ens.validate()
    mart = spec.validate(ens)
    moments = spec.moment_doubling(ens)
    ns = (4, 8, 16, 32, 64)
    H16 = st.ElementaryProcess.riemann(st.clipped_A, st.dyadic_times(16, ens.steps))
    rep = st.representation_gap(H16, spec, ens)
    iso = st.isometry_gap(H16, spec, ens)
    refine = st.refinement_study(st.clipped_A, spec, ens, ns)
    seq = [st.ElementaryProcess.riemann(st.clipped_A, st.dyadic_times(n, ens.steps)) for n in ns]
    cauchy = st.cauchy_convergence(seq, spec, ens)
    c3 = st.corollary3_check(spec, ens, cfg.trials or 32, trial_rng(cfg.seed, 1))
    demo = st.nonadapted_demo(ens)
    qv = st.quadratic_variation_demo(ens)
    tree = st.BrownianProductEnsemble.binomial(8)
    Ht = st.ElementaryProcess.riemann(st.clipped_A, st.dyadic_times(4, tree.steps))
    tree_rep = st.representation_gap(Ht, spec, tree)
    tree_iso = st.isometry_gap(Ht, spec, tree)
    hard = {
        "ensemble_valid": valid["pass"],
        "martingales_valid": mart["pass"],
        "moments_stable": moments["pass"],
        "representation_integral": rep["integral_gap"] <= TOL,
        "representation_seminorm": rep["seminorm_gap"] <= TOL,
        "isometry": iso["gap"] <= TOL,
        "refinement_spread": refine["pass"],
        "cauchy": cauchy["pass"],
        "corollary3": c3["pass"],
        "nonadapted": demo["pass"],
    }
    summary = {
        "paths": [m1, m2], "steps": ens.steps, "hard": hard,
        "representation": rep, "isometry": iso, "refinement": refine, "cauchy": cauchy,
        "corollary3": c3, "nonadapted": demo, "quadratic_variation": qv,
        "binomial_tree": {"representation": tree_rep, "isometry": tree_iso},
        "pass": all(hard.values()),
    }
    rows = [[n, r] for n, r in zip(refine["ns"], refine["ratios"])]
    crow = [[j, d, b] for j, (d, b) in enumerate(zip(cauchy["distances"], cauchy["bounds"]))]
    tables = {"integral_ratio": (["n", "ratio"], rows),
              "cauchy": (["step", "distance", "bound"], crow)}
    failures = [] if summary["pass"] else [{"suite": "stochastic", "seed": cfg.seed,
                                            "failed": [k for k, v in hard.items() if not v]}]
    return SuiteResult("stochastic", summary, tables, failures)


RUNNERS = {
    "identities": run_identities,
    "bellman": run_bellman,
    "estimates": run_estimates,
    "paraproduct": run_paraproduct,
    "stochastic": run_stochastic,
}


def run_suite(cfg: ExperimentConfig) -> SuiteResult:
    cfg.validate()
    t0 = time.perf_counter()
    res = RUNNERS[cfg.suite](cfg)
    res.seconds = time.perf_counter() - t0
    return res


def replay_failure(artifact: dict) -> dict:
    """Re-run the per-instance checks of a serialized failing instance."""
    suite = artifact.get("suite")
    if suite not in ("identities", "bellman", "estimates") or "instance" not in artifact:
        raise ProbabilityError("artifact does not hold a replayable martingale instance")
    inputs = inputs_from_json(artifact["instance"])
    if suite == "identities":
        return identity_checks(inputs, _aux_rng(artifact["seed"], artifact["trial"]))
    if suite == "bellman":
        return bellman_checks(inputs)
    return estimate_checks(inputs, ExponentTriple(*artifact["exponents"]))
