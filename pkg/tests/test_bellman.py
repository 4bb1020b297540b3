from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mlab.bellman import (
    alpha_k,
    alpha_k_fiber,
    beta_k,
    control_quantities,
    delta_k,
    drift_check,
    dual_pairing,
    epsilon_k,
    eta_k,
    gamma_cs_margin,
    gamma_k,
    proof_chain_check,
    quantities_to_json,
    size_bound_margin,
    telescoping_margin,
    zeta_k,
)
from mlab.fuzz import random_inputs, trial_rng
from mlab.probspace import ProbabilityError

F = Fraction


def loop_cexp(x, labels, mass):
    """Conditional expectation by explicit loops over flat outcomes."""
    x, labels, mass = x.ravel(), labels.ravel(), mass.ravel()
    out = np.empty(x.size, dtype=x.dtype)
    for i in range(x.size):
        idx = [j for j in range(x.size) if labels[j] == labels[i]]
        tot = sum(mass[j] for j in idx)
        out[i] = sum(mass[j] * x[j] for j in idx) / tot
    return out


def gamma_oracle(v, w, pair, k):
    a, b = pair.filt1[k].block_of, pair.filt2[k].block_of
    m1, m2 = pair.space1.mass, pair.space2.mass
    n1, n2 = v.shape
    out = np.empty((n1, n2), dtype=v.dtype)
    for i in range(n1):
        A = [t for t in range(n1) if a[t] == a[i]]
        MA = sum(m1[t] for t in A)
        for j in range(n2):
            B = [s for s in range(n2) if b[s] == b[j]]
            MB = sum(m2[s] for s in B)
            acc = 0
            for i1 in A:
                for i2 in A:
                    inner = sum(m2[s] * v[i1, s] * w[i2, s] for s in B) / MB
                    acc = acc + m1[i1] * m1[i2] * inner * inner
            out[i, j] = acc / (MA * MA)
    return out


def alpha_oracle(inp, k):
    pair = inp.pair
    mass = pair.space.mass
    n1, n2 = pair.shape

    def G(l):
        # full information in the first coordinate, B_l blocks in the second
        return np.arange(n1)[:, None] * n2 + pair.filt2[l].block_of[None, :]
    xz = inp.Xp[k] * inp.Z.values
    d = loop_cexp(xz, G(k + 1), mass) - loop_cexp(xz, G(k), mass)
    dy = (inp.Yp[k + 1] - inp.Yp[k]).ravel()
    return loop_cexp((dy * d).reshape(pair.shape), pair.H(k).block_of.reshape(pair.shape), mass)


@given(st.integers(0, 2**32 - 1))
def test_gamma_matches_quadruple_sum(seed):
    rng = np.random.default_rng(seed)
    inp = random_inputs(rng, (3, 3), 2, exact=True)
    X, Z = inp.X.values, inp.Z.values
    for k in range(3):
        assert (gamma_k(X, Z, inp.pair, k).values == gamma_oracle(X, Z, inp.pair, k)).all()


def test_gamma_float_matches_oracle(rng):
    inp = random_inputs(rng, (4, 3), 3)
    X, Z = inp.X.values, inp.Z.values
    for k in range(4):
        assert np.allclose(gamma_k(X, Z, inp.pair, k).values, gamma_oracle(X, Z, inp.pair, k), atol=1e-13)


def test_gamma_trivial_steps(rng):
    inp = random_inputs(rng, (3, 3), 2)
    v = inp.X.values
    # trivial A_0 and B_0: gamma(V, 1) = E_1 (E_2 V)^2, a constant
    g = gamma_k(v, np.ones_like(v), inp.pair, 0).values
    m1, m2 = inp.pair.space1.mass, inp.pair.space2.mass
    assert np.allclose(g, m1 @ (v @ m2) ** 2, atol=1e-14)


@given(st.integers(0, 2**32 - 1))
def test_alpha_oracle_and_fiber_form(seed):
    rng = np.random.default_rng(seed)
    inp = random_inputs(rng, (3, 2), 2, exact=True)
    for k in range(2):
        a = alpha_k(inp, k).values
        assert (a.ravel() == alpha_oracle(inp, k)).all()
        assert (alpha_k_fiber(inp, k).values == a).all()


def test_alpha_vanishes_when_Y_constant(rng):
    inp = random_inputs(rng, (3, 3), 3)
    inp = inp.with_values(Y=np.full((3, 3), 2.0))
    for k in range(3):
        assert np.allclose(alpha_k(inp, k).values, 0, atol=1e-15)


def test_beta_assembly(rng):
    inp = random_inputs(rng, (3, 4), 2, exact=True)
    pair, k = inp.pair, 1
    X, Z = inp.X.values, inp.Z.values
    yk = inp.Yp[k]
    n1, n2 = pair.shape
    f_atoms = pair.filt1[k].block_of[:, None] * n2 + np.arange(n2)[None, :]
    ey = loop_cexp(yk * yk, f_atoms, pair.space.mass).reshape(pair.shape)
    ref = (F(1, 2) * ey + F(1, 2) * gamma_oracle(X, Z, pair, k)
           + F(1, 4) * gamma_oracle(X, X, pair, k) + F(1, 4) * gamma_oracle(Z, Z, pair, k))
    assert (beta_k(inp, k).values == ref).all()


@given(st.integers(0, 2**32 - 1))
def test_drift_and_size_exact(seed):
    rng = np.random.default_rng(seed)
    inp = random_inputs(rng, (3, 3), 2, exact=True)
    for k in range(2):
        assert min(drift_check(inp, k).values.ravel()) >= 0
    for k in range(3):
        assert min(size_bound_margin(inp, k).values.ravel()) >= 0


@given(st.integers(0, 2**32 - 1))
def test_proof_chain_exact(seed):
    rng = np.random.default_rng(seed)
    inp = random_inputs(rng, (2, 3), 2, exact=True)
    for k in range(2):
        out = proof_chain_check(inp, k)
        assert out["pass"], out
        assert all(g == 0 for g in out["gaps"].values())


def test_proof_chain_float(rng):
    for i in range(30):
        inp = random_inputs(trial_rng(9, i), (4, 4), 3, heavy=True)
        for k in range(3):
            assert proof_chain_check(inp, k)["pass"]


def test_epsilon_split_and_eta_nonneg(rng):
    inp = random_inputs(rng, (4, 4), 2)
    pair = inp.pair
    X, Z = inp.X.values, inp.Z.values
    for k in range(2):
        eps = epsilon_k(inp, k).values
        assert np.allclose(eps, delta_k(X, Z, pair, k).values - zeta_k(inp, k).values, atol=1e-12)
        assert eps.min() >= -1e-12
        assert eta_k(X, pair, k).values.min() >= -1e-12


def test_control_quantities_measurable(rng):
    inp = random_inputs(rng, (4, 3), 2)
    q = control_quantities(inp, 1)
    assert all(q.check(inp.pair).values())
    assert set(quantities_to_json(q)) >= {"k", "alpha", "beta", "zeta"}


def test_delta_routes_agree(rng):
    inp = random_inputs(rng, (3, 3), 2, exact=True)
    X = inp.X.values
    assert (delta_k(X, X, inp.pair, 0).values == delta_k(X, X, inp.pair, 0, route="fiber").values).all()
    with pytest.raises(ProbabilityError):
        delta_k(X, X, inp.pair, 0, route="other")
    with pytest.raises(ProbabilityError):
        alpha_k(inp, 2)


def test_homogeneity(rng):
    inp = random_inputs(rng, (3, 3), 2)
    lam = 1.7
    scaled = inp.with_values(X=lam * inp.X.values, Y=lam**2 * inp.Y.values, Z=lam * inp.Z.values)
    for k in range(2):
        assert np.allclose(drift_check(scaled, k).values, lam**4 * drift_check(inp, k).values,
                           atol=1e-12)
        assert np.allclose(alpha_k(scaled, k).values, lam**4 * alpha_k(inp, k).values, atol=1e-12)


def test_gamma_cauchy_schwarz(rng):
    for i in range(20):
        inp = random_inputs(trial_rng(2, i), (4, 4), 3)
        for k in range(4):
            assert gamma_cs_margin(inp.X, inp.Z, inp.pair, k).values.min() >= -1e-12


def test_telescoping_margin(rng):
    inp = random_inputs(rng, (3, 3), 3, exact=True)
    assert telescoping_margin(inp) >= 0


@given(st.integers(0, 2**32 - 1))
def test_dual_pairing_exact(seed):
    rng = np.random.default_rng(seed)
    inp = random_inputs(rng, (3, 3), 2, exact=True, with_K=True)
    out = dual_pairing(inp)
    assert out["gap"] == 0
    assert out["pass"] and out["ratio"] <= 1.5


def test_dual_pairing_zero_norms(rng):
    inp = random_inputs(rng, (2, 2), 1, exact=True)
    out = dual_pairing(inp.with_values(Z=np.zeros((2, 2), dtype=int)))
    assert out["ratio"] == 0.0 and out["lhs"] == 0
