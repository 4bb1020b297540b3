import numpy as np
import pytest

from mlab.probspace import ProbabilityError
from mlab.stochastic import (
    BrownianProductEnsemble,
    ElementaryProcess,
    MartingalePairSpec,
    bdg_constant,
    cauchy_convergence,
    clipped_A,
    corollary3_check,
    corollary4_check,
    dyadic_times,
    isometry_gap,
    nonadapted_demo,
    quadratic_variation_demo,
    refinement_study,
    representation_gap,
    seminorm,
    stochastic_integral,
)

SPEC = MartingalePairSpec.example()


@pytest.fixture(scope="module")
def ens():
    return BrownianProductEnsemble.generate(256, 256, 1024, seed=0)


@pytest.fixture(scope="module")
def tree():
    return BrownianProductEnsemble.binomial(8)


@pytest.fixture(scope="module")
def small():
    return BrownianProductEnsemble.generate(4, 4, 4, seed=1)


# --------------------------------------------------------------- ensembles ---


def test_generate_reproducible_and_independent_streams():
    a = BrownianProductEnsemble.generate(8, 8, 16, seed=5)
    b = BrownianProductEnsemble.generate(8, 8, 16, seed=5)
    assert np.array_equal(a.A_paths, b.A_paths) and np.array_equal(a.B_paths, b.B_paths)
    assert not np.array_equal(a.A_paths, a.B_paths)
    assert a.dt == 1 / 16 and a.shape == (8, 8)


def test_validate_gaussian(ens):
    assert ens.validate()["pass"]


def test_binomial_tree_is_complete():
    t = BrownianProductEnsemble.binomial(3)
    assert t.m1 == 8
    inc = np.diff(t.A_paths, axis=1)
    assert np.allclose(np.abs(inc), np.sqrt(1 / 3))
    assert len({tuple(r) for r in np.sign(inc)}) == 8
    with pytest.raises(ProbabilityError):
        BrownianProductEnsemble.binomial(11)


def test_ensemble_rejects_bad_paths():
    with pytest.raises(ProbabilityError):
        BrownianProductEnsemble(np.ones((2, 3)), np.zeros((2, 3)))
    with pytest.raises(ProbabilityError):
        BrownianProductEnsemble(np.zeros((2, 3)), np.zeros((2, 4)))


def test_save_load_roundtrip(tmp_path, small):
    small.save(tmp_path / "e")
    back = BrownianProductEnsemble.load(tmp_path / "e")
    assert np.array_equal(back.A_paths, small.A_paths) and back.seed == 1 and back.t == small.t
    np.save(tmp_path / "e" / "A.npy", small.A_paths[:2])
    with pytest.raises(ProbabilityError):
        BrownianProductEnsemble.load(tmp_path / "e")


def test_spec_martingale_validation(ens):
    assert SPEC.validate(ens)["pass"]
    assert MartingalePairSpec.brownian_only().validate(ens)["pass"]
    with pytest.raises(ProbabilityError):
        MartingalePairSpec("drift")


def test_moment_doubling_rejects_outlier_ensemble():
    good = BrownianProductEnsemble.generate(64, 64, 16, seed=2)
    assert SPEC.moment_doubling(good)["pass"]
    a = good.A_paths.copy()
    a[-1] *= 1e3  # the half ensemble excludes the last path
    bad = BrownianProductEnsemble(a, good.B_paths, good.t)
    assert not SPEC.moment_doubling(bad)["pass"]


# --------------------------------------------------------------- integrals ---


def test_constant_integrands_telescope(ens):
    times = dyadic_times(8, ens.steps)
    assert np.array_equal(stochastic_integral(ElementaryProcess.constant(0.0, times), SPEC, ens),
                          np.zeros(ens.shape))
    one = stochastic_integral(ElementaryProcess.constant(1.0, times), SPEC, ens)
    assert np.allclose(one, SPEC.XY(ens, ens.steps) - SPEC.XY(ens, 0), atol=1e-12)


def test_two_interval_hand_expansion(small):
    H = ElementaryProcess((0, 2, 4), lambda k, a, b: 2.0 if k < 1 else 3.0)
    A, B = small.A_paths, small.B_paths
    u, v = np.sign(A[:, -1]), np.sign(B[:, -1])
    out = np.zeros((4, 4))
    for i in range(4):
        for j in range(4):
            xy = [A[i, s] * v[j] * u[i] * B[j, s] for s in (0, 2, 4)]
            out[i, j] = 2 * (xy[1] - xy[0]) + 3 * (xy[2] - xy[1])
    assert np.allclose(stochastic_integral(H, SPEC, small), out, atol=1e-14)


def test_integral_linearity(ens):
    t1, t2 = dyadic_times(4, ens.steps), dyadic_times(8, ens.steps)
    H1 = ElementaryProcess.riemann(clipped_A, t1)
    H2 = ElementaryProcess(t2, lambda k, a, b: np.sign(b[:, -1])[None, :])
    comb = H1.combine(H2, 2.0, -0.5)
    lhs = stochastic_integral(comb, SPEC, ens)
    rhs = 2 * stochastic_integral(H1, SPEC, ens) - 0.5 * stochastic_integral(H2, SPEC, ens)
    assert np.allclose(lhs, rhs, atol=1e-12)


def test_rule_sees_only_the_past(small):
    seen = []

    def rule(k, a, b):
        seen.append((k, a.shape[1], b.shape[1]))
        return 1.0

    H = ElementaryProcess((0, 1, 3, 4), rule)
    stochastic_integral(H, SPEC, small)
    assert seen == [(0, 1, 1), (1, 2, 2), (2, 4, 4)]


def test_refined_rule_windows(small):
    seen = []

    def rule(k, a, b):
        seen.append((k, a.shape[1]))
        return float(k)

    H = ElementaryProcess((0, 2, 4), rule).refine([1, 3])
    vals = H.values(small)
    assert [float(v[0, 0]) for v in vals] == [0.0, 0.0, 1.0, 1.0]
    assert all(w == (1 if k == 0 else 3) for k, w in seen)


def test_partition_validation():
    with pytest.raises(ProbabilityError):
        ElementaryProcess((1, 2), lambda k, a, b: 1.0)
    with pytest.raises(ProbabilityError):
        ElementaryProcess((0, 2, 2), lambda k, a, b: 1.0)
    with pytest.raises(ProbabilityError):
        dyadic_times(3, 1024)


# -------------------------------------------------------- seminorm/isometry ---


def test_seminorm_of_one_exact_on_tree(tree):
    # the terminal sign vanishes on walks ending at 0, which have probability C(8,4)/2^8
    H = ElementaryProcess.constant(1.0, dyadic_times(4, tree.steps))
    assert seminorm(H, SPEC, tree) == pytest.approx(np.sqrt(2.0 * (1 - 70 / 256)), abs=1e-14)


def test_seminorm_of_one_gaussian(ens):
    H = ElementaryProcess.constant(1.0, dyadic_times(8, ens.steps))
    assert seminorm(H, SPEC, ens) == pytest.approx(np.sqrt(2.0), rel=0.05)


def test_tree_representation_and_isometry_exact(tree):
    H = ElementaryProcess.riemann(clipped_A, dyadic_times(4, tree.steps))
    rep = representation_gap(H, SPEC, tree)
    assert rep["integral_gap"] <= 1e-12
    assert rep["seminorm_gap"] <= 1e-12
    assert isometry_gap(H, SPEC, tree)["gap"] <= 1e-12


def test_representation_integral_gap_gaussian(ens):
    H = ElementaryProcess.riemann(clipped_A, dyadic_times(8, ens.steps))
    assert representation_gap(H, SPEC, ens)["integral_gap"] <= 1e-12


# ------------------------------------------------------------- bounds ---


def test_bdg_constant_single_interval(ens):
    # one interval: the square function is |M_t - M_0|
    assert bdg_constant(SPEC, ens, (0, ens.steps)) == pytest.approx(1.0, abs=1e-14)


def test_integral_ratio_homogeneity_and_bound(ens):
    times = dyadic_times(8, ens.steps)
    a = corollary4_check(ElementaryProcess.riemann(clipped_A, times), SPEC, ens)
    b = corollary4_check(ElementaryProcess(times, lambda k, x, y: -3.0 * clipped_A(x, y)), SPEC, ens)
    assert a["pass"] and b["pass"]
    assert b["ratio"] == pytest.approx(a["ratio"], rel=1e-12)
    assert a["split_gap"] <= 1e-12
    assert a["C_eff"] > 1.5


def test_integral_ratio_zero_integrand_skipped(small):
    assert corollary4_check(ElementaryProcess.constant(0.0, (0, 2, 4)), SPEC, small)["skipped"]


def test_bounded_integrands_under_cap(ens):
    out = corollary3_check(SPEC, ens, 10, np.random.default_rng(0))
    assert out["pass"] and out["max_norm"] <= out["cap"]


def test_refinement_study_stable(ens):
    assert refinement_study(clipped_A, SPEC, ens, ns=(4, 8, 16))["spread"] < 3


def test_cauchy_convergence(ens):
    seq = [ElementaryProcess.riemann(clipped_A, dyadic_times(n, ens.steps)) for n in (4, 8, 16, 32)]
    out = cauchy_convergence(seq, SPEC, ens)
    assert out["decreasing"] and out["dominated"]
    with pytest.raises(ProbabilityError):
        cauchy_convergence(seq[:1], SPEC, ens)


# ---------------------------------------------------------- non-adapted ---


def test_nonadapted_constant_factors_have_zero_residual(ens):
    out = nonadapted_demo(ens, spec=MartingalePairSpec("brownian", "brownian", "one", "one"))
    assert out["residual"] == 0 and out["analytic"] == 0 and not out["pass"]


def test_nonadapted_signs(ens):
    out = nonadapted_demo(ens)
    assert out["margin_se"] >= 5 and out["pass"]
    assert out["residual"] == pytest.approx(out["analytic"], rel=0.5)
    with pytest.raises(ProbabilityError):
        nonadapted_demo(ens, epsilon_index=0)


def test_quadratic_variation_demo(ens):
    out = quadratic_variation_demo(ens)
    assert out["quadratic_variation"] == pytest.approx(out["epsilon"], rel=0.02)
    # total variation grows as the partition of [0, e] is refined
    tv = [out["total_variation"][n] for n in sorted(out["total_variation"])]
    assert tv == sorted(tv) and tv[-1] > 4 * tv[0]
