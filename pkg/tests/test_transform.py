from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mlab.fuzz import dyadic_filtration, random_inputs, random_pair, trial_rng
from mlab.probspace import (
    FiniteProbSpace,
    Filtration,
    Partition,
    ProbabilityError,
    ProductFiltrationPair,
    block_average,
    lp_norm,
)
from mlab.transform import (
    DiscreteProcess,
    MartingaleInputs,
    burkholder_ratio,
    covariation_sum,
    dot_transform,
    growth_probe,
    ito_isometry_gap,
    k_dot_xy,
    kx_dot_y,
    ky_dot_x,
    splitting_residual,
    theorem1a_ratios,
    uniform_growth_constant,
)

F = Fraction


def const_process(values, sp):
    return DiscreteProcess.from_arrays([np.full(sp.shape, v) for v in values], sp)


def test_dot_transform_hand_example():
    sp = FiniteProbSpace.uniform(1)
    u = const_process([1, 2, 3, 0], sp)
    v = const_process([0, 1, 3, 4], sp)
    # 1*(1-0) + 2*(3-1) + 3*(4-3)
    assert dot_transform(u, v, 3).values.item() == 8
    assert dot_transform(u, v, 0).values.item() == 0
    assert dot_transform(u, v, 1).values.item() == 1
    with pytest.raises(ProbabilityError):
        dot_transform(u, v, 4)


def test_dot_transform_constant_multiplier_telescopes(rng):
    inp = random_inputs(rng, (3, 4), 3)
    ones = DiscreteProcess.constant(1, inp.space, 3)
    t = dot_transform(ones, inp.Yp, 3).values
    assert np.allclose(t, inp.Yp[3] - inp.Yp[0], atol=1e-14)


def test_kx_dot_y_is_composition(rng):
    inp = random_inputs(rng, (3, 3), 3, with_K=True)
    kx = DiscreteProcess.from_arrays([inp.K[k] * inp.Xp[k] for k in range(3)], inp.space)
    for n in range(4):
        assert np.allclose(kx_dot_y(inp, n).values, dot_transform(kx, inp.Yp, n).values, atol=1e-14)
    ky = DiscreteProcess.from_arrays([inp.K[k] * inp.Yp[k] for k in range(3)], inp.space)
    assert np.allclose(ky_dot_x(inp, 3).values, dot_transform(ky, inp.Xp, 3).values, atol=1e-14)


def test_transforms_by_explicit_loop(rng):
    inp = random_inputs(rng, (2, 3), 2, with_K=True)
    X, Y, K = inp.Xp, inp.Yp, inp.K
    for i in range(2):
        for j in range(3):
            xy = sum(K[k - 1][i, j] * (X[k][i, j] * Y[k][i, j] - X[k - 1][i, j] * Y[k - 1][i, j])
                     for k in (1, 2))
            cov = sum(K[k - 1][i, j] * (X[k][i, j] - X[k - 1][i, j]) * (Y[k][i, j] - Y[k - 1][i, j])
                      for k in (1, 2))
            assert k_dot_xy(inp, 2).values[i, j] == pytest.approx(xy, abs=1e-14)
            assert covariation_sum(inp, 2).values[i, j] == pytest.approx(cov, abs=1e-14)


@given(st.integers(0, 2**32 - 1))
def test_splitting_and_isometry_exact(seed):
    rng = np.random.default_rng(seed)
    inp = random_inputs(rng, (3, 3), 3, exact=True, with_K=True)
    for n in range(4):
        assert splitting_residual(inp, n) == 0
        assert ito_isometry_gap(inp, n, "X") == 0
        assert ito_isometry_gap(inp, n, "Y") == 0


def test_splitting_and_isometry_float(rng):
    for i in range(20):
        inp = random_inputs(trial_rng(1, i), (4, 4), 3, with_K=True)
        assert splitting_residual(inp, 3) <= 1e-12
        assert ito_isometry_gap(inp, 3, "Y") <= 1e-12
    with pytest.raises(ProbabilityError):
        ito_isometry_gap(inp, 3, "Z")


def test_martingale_processes(rng):
    inp = random_inputs(rng, (4, 3), 3)
    mass = inp.space.mass
    for k in range(3):
        assert np.allclose(block_average(inp.Xp[k + 1], mass, inp.pair.F(k)), inp.Xp[k], atol=1e-14)
        assert np.allclose(block_average(inp.Yp[k + 1], mass, inp.pair.G(k)), inp.Yp[k], atol=1e-14)
    # X_k depends on the first coordinate only through A_k
    assert np.allclose(inp.Xp[0], inp.Xp[0][:1, :], atol=1e-14)


def test_reduced_and_absorbed(rng):
    inp = random_inputs(rng, (3, 3), 3, with_K=True)
    red = inp.reduced(2)
    assert np.allclose(kx_dot_y(red, 2).values, kx_dot_y(inp, 2).values, atol=1e-14)
    ab = inp.absorbed(3)
    assert np.allclose(kx_dot_y(ab, 3).values, kx_dot_y(inp, 3).values, atol=1e-13)


# ----------------------------------------------------------- Burkholder ---


def test_burkholder_signs_are_isometric_in_L2():
    f = dyadic_filtration(3)
    sp1 = FiniteProbSpace.uniform(1)
    sp2 = FiniteProbSpace.uniform(8)
    pair = ProductFiltrationPair(sp1, sp2, Filtration((Partition.trivial(1),) * 4), f)
    y = np.random.default_rng(0).standard_normal((1, 8))
    inp = MartingaleInputs(pair, np.ones((1, 8)), y, y)
    K = const_process([1, -1, 1, -1], pair.space)
    mass = pair.space.mass
    expected = lp_norm(dot_transform(K, inp.Yp, 3), 2) / lp_norm(inp.Yp[3], 2, mass)
    assert burkholder_ratio(K, inp.Yp, 3, 2) == pytest.approx(expected, rel=1e-14)
    # mean-zero increments: signs preserve the L2 norm when Y_0 = 0
    y0 = y - y.mean()
    inp0 = inp.with_values(Y=y0, Z=y0)
    assert burkholder_ratio(K, inp0.Yp, 3, 2) == pytest.approx(1.0, rel=1e-12)


def test_burkholder_zero_denominator():
    sp = FiniteProbSpace.uniform(2)
    z = const_process([0, 0], sp)
    assert burkholder_ratio(z, const_process([1, 2], sp), 1, 2) == 0.0


# -------------------------------------------------------- growth constant ---


def brute_growth(pair):
    """Worst parent/child mass ratio found by testing indicators of every child atom."""
    mass = np.asarray(pair.space.mass, dtype=float)
    best = 1.0
    for k in range(pair.horizon):
        for c in pair.H(k + 1).blocks():
            u = np.zeros(pair.space.size)
            u[c] = 1
            u = u.reshape(pair.shape)
            hi = np.max(block_average(u, mass, pair.H(k + 1)))
            lo = np.max(block_average(u, mass, pair.H(k)))
            best = max(best, hi / lo)
    return best


def test_growth_constant_constant_filtration():
    sp = FiniteProbSpace.uniform(3, exact=True)
    f = Filtration((Partition.trivial(3),) * 3)
    assert uniform_growth_constant(ProductFiltrationPair(sp, sp, f, f)) == 1


def test_growth_constant_dyadic_is_four():
    f = dyadic_filtration(3)
    sp = FiniteProbSpace.uniform(8, exact=True)
    assert uniform_growth_constant(ProductFiltrationPair(sp, sp, f, f)) == 4


def test_growth_constant_hand_example():
    sp1 = FiniteProbSpace.from_weights([1, 3], exact=True)
    sp2 = FiniteProbSpace.uniform(1, exact=True)
    f1 = Filtration((Partition.trivial(2), Partition.discrete(2)))
    f2 = Filtration((Partition.trivial(1),) * 2)
    assert uniform_growth_constant(ProductFiltrationPair(sp1, sp2, f1, f2)) == 4


@given(st.integers(0, 2**32 - 1))
def test_growth_constant_vs_brute_and_probe(seed):
    rng = np.random.default_rng(seed)
    pair = random_pair((4, 3), 3, rng)
    A = uniform_growth_constant(pair)
    assert A == pytest.approx(brute_growth(pair), rel=1e-12)
    assert growth_probe(pair, rng, 16) <= A * (1 + 1e-12)


def test_growth_constant_relabel_invariant(rng):
    pair = random_pair((4, 4), 3, rng, exact=True)
    perm1, perm2 = rng.permutation(4), rng.permutation(4)
    sp1 = FiniteProbSpace(pair.space1.mass[perm1])
    sp2 = FiniteProbSpace(pair.space2.mass[perm2])
    f1 = Filtration(tuple(Partition(p.block_of[perm1]) for p in pair.filt1))
    f2 = Filtration(tuple(Partition(p.block_of[perm2]) for p in pair.filt2))
    assert uniform_growth_constant(ProductFiltrationPair(sp1, sp2, f1, f2)) == uniform_growth_constant(pair)


# -------------------------------------------------------- modified transforms ---


def test_modified_transform_ratio_bounded(rng):
    for i in range(40):
        r = trial_rng(5, i)
        inp = random_inputs(r, (4, 4), 3, with_K=True, heavy=True)
        out = theorem1a_ratios(inp)
        assert out["pass"] and out["ratio1"] <= 1.5 + 1e-9


def test_nonmeasurable_K_rejected(rng):
    pair = random_pair((3, 3), 2, rng, split_prob=1.0)
    bad = [np.ones((3, 3)), np.arange(9.0).reshape(3, 3), np.ones((3, 3))]
    with pytest.raises(ProbabilityError):
        MartingaleInputs(pair, np.ones((3, 3)), np.ones((3, 3)), np.ones((3, 3)),
                         DiscreteProcess.from_arrays(bad, pair.space))


def test_exact_transform_is_rational(rng):
    inp = random_inputs(rng, (2, 2), 2, exact=True)
    t = kx_dot_y(inp, 2).values
    assert t.dtype == object and all(isinstance(v, F) for v in t.ravel())
