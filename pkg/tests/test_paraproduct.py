import numpy as np
import pytest

from mlab.estimates import ExponentTriple
from mlab.paraproduct import (
    DyadicGrid2D,
    GridFunction,
    KernelSpec,
    commuting_gap,
    difference_decomposition,
    difference_decomposition_check,
    martingale_paraproduct,
    norm_ratio,
    random_rectangles,
    sample_continuum,
    smooth_projection,
    square_function,
    twisted_paraproduct,
)
from mlab.probspace import ProbabilityError
from mlab.transform import uniform_growth_constant

E = ExponentTriple(3.0, 3.0)


def loop_cond(h, axis, k, depth):
    side = 2**depth
    w = 2 ** (depth - k)
    out = np.empty_like(h)
    for i in range(side):
        for j in range(side):
            c = (i, j)[axis]
            lo = (c // w) * w
            if axis == 0:
                out[i, j] = np.mean([h[t, j] for t in range(lo, lo + w)])
            else:
                out[i, j] = np.mean([h[i, t] for t in range(lo, lo + w)])
    return out


def loop_conv(h, axis, kind, k, depth):
    side = 2**depth
    w = 2 ** (depth - k)
    if kind == "box":
        taps = {u: 1 / w for u in range(-(w // 2), w - w // 2)}
    else:
        taps = {u: (w - abs(u)) / w**2 for u in range(-(w - 1), w)}
    out = np.zeros_like(h)
    for i in range(side):
        for j in range(side):
            for u, phi in taps.items():
                if axis == 0:
                    out[i, j] += h[(i - u) % side, j] * phi
                else:
                    out[i, j] += h[i, (j - u) % side] * phi
    return out


# ---------------------------------------------------------------- kernels ---


def test_triangle_spike_profile():
    grid = DyadicGrid2D(3)
    spike = np.zeros((8, 8))
    spike[0, :] = 1
    out = smooth_projection(spike, 0, KernelSpec("triangle", 1), grid)
    assert np.allclose(out[:, 0], np.array([4, 3, 2, 1, 0, 1, 2, 3]) / 16, atol=1e-15)
    # coarsest triangle (width 8) wraps onto a uniform average
    out0 = smooth_projection(spike, 0, KernelSpec("triangle", 0), grid)
    assert np.allclose(out0, 1 / 8, atol=1e-15)


def test_box_coarsest_is_axis_average(rng):
    grid = DyadicGrid2D(3)
    h = rng.standard_normal((8, 8))
    out = smooth_projection(h, 1, KernelSpec("box", 0), grid)
    assert np.allclose(out, h.mean(axis=1, keepdims=True), atol=1e-14)


def test_finest_kernels_are_identity(rng):
    grid = DyadicGrid2D(3)
    h = rng.standard_normal((8, 8))
    for kind in ("box", "triangle"):
        assert np.allclose(smooth_projection(h, 0, KernelSpec(kind, 3), grid), h)


def test_kernel_weights_sum_to_one():
    for kind in ("box", "triangle"):
        for k in range(5):
            _, w = KernelSpec(kind, k).weights(4)
            assert w.sum() == pytest.approx(1.0, abs=1e-15) and np.all(w >= 0)
    with pytest.raises(ProbabilityError):
        KernelSpec("gauss", 1)
    with pytest.raises(ProbabilityError):
        KernelSpec("box", 5).weights(4)


@pytest.mark.parametrize("kind", ["box", "triangle"])
def test_smooth_projection_vs_loops(kind, rng):
    grid = DyadicGrid2D(2)
    h = rng.standard_normal((4, 4))
    for axis in (0, 1):
        for k in range(3):
            assert np.allclose(smooth_projection(h, axis, KernelSpec(kind, k), grid),
                               loop_conv(h, axis, kind, k, 2), atol=1e-14)


def test_grid_conditional_vs_loops(rng):
    grid = DyadicGrid2D(3)
    h = rng.standard_normal((8, 8))
    for k in range(4):
        assert np.allclose(grid.cond_x(h, k), loop_cond(h, 0, k, 3), atol=1e-14)
        assert np.allclose(grid.cond_y(h, k), loop_cond(h, 1, k, 3), atol=1e-14)


# ------------------------------------------------------------ paraproducts ---


def test_martingale_paraproduct_vs_loops(rng):
    grid = DyadicGrid2D(2)
    f, g = rng.standard_normal((4, 4)), rng.standard_normal((4, 4))
    ref = sum(loop_cond(f, 0, k, 2) * (loop_cond(g, 1, k + 1, 2) - loop_cond(g, 1, k, 2))
              for k in range(2))
    assert np.allclose(martingale_paraproduct(f, g, grid), ref, atol=1e-14)


@pytest.mark.parametrize("kinds", ["box", "triangle", ("box", "triangle")])
def test_twisted_paraproduct_vs_loops(kinds, rng):
    grid = DyadicGrid2D(2)
    kx, ky = (kinds, kinds) if isinstance(kinds, str) else kinds
    f, g = rng.standard_normal((4, 4)), rng.standard_normal((4, 4))
    ref = sum(loop_conv(f, 0, kx, k, 2) * (loop_conv(g, 1, ky, k + 1, 2) - loop_conv(g, 1, ky, k, 2))
              for k in range(2))
    assert np.allclose(twisted_paraproduct(f, g, grid, kinds), ref, atol=1e-14)


def test_paraproducts_constant_inputs(rng):
    grid = DyadicGrid2D(3)
    f = rng.standard_normal((8, 8))
    c = np.full((8, 8), 2.0)
    assert np.allclose(martingale_paraproduct(f, c, grid), 0, atol=1e-14)
    assert np.allclose(twisted_paraproduct(f, c, grid), 0, atol=1e-14)
    # constant f telescopes: T(c, g) = c (E(g|G_n) - E(g|G_0))
    g = rng.standard_normal((8, 8))
    assert np.allclose(martingale_paraproduct(c, g, grid), 2 * (g - g.mean(axis=1, keepdims=True)),
                       atol=1e-13)
    assert np.allclose(twisted_paraproduct(c, g, grid, "box"),
                       2 * (g - g.mean(axis=1, keepdims=True)), atol=1e-13)


def test_bilinearity(rng):
    grid = DyadicGrid2D(3)
    f1, f2, g = (rng.standard_normal((8, 8)) for _ in range(3))
    for op in (martingale_paraproduct, twisted_paraproduct):
        assert np.allclose(op(2 * f1 - 3 * f2, g, grid), 2 * op(f1, g, grid) - 3 * op(f2, g, grid),
                           atol=1e-12)
        assert np.allclose(op(g, 2 * f1 - 3 * f2, grid), 2 * op(g, f1, grid) - 3 * op(g, f2, grid),
                           atol=1e-12)


# --------------------------------------------------------- square functions ---


def test_mart_square_function_one_scale(rng):
    grid = DyadicGrid2D(1)
    h = rng.standard_normal((2, 2))
    s = square_function(h, "mart_x", grid)
    assert np.allclose(s, np.abs(h - h.mean(axis=0, keepdims=True)), atol=1e-15)


def test_haar_square_function():
    grid = DyadicGrid2D(2)
    haar = np.repeat(np.array([1.0, 1.0, -1.0, -1.0])[:, None], 4, axis=1)
    assert np.allclose(square_function(haar, "mart_x", grid), 1.0)
    assert np.allclose(square_function(haar, "mart_y", grid), 0.0)
    with pytest.raises(ProbabilityError):
        square_function(haar, "other_x", grid)


def test_jsw_vanishes_on_constants():
    grid = DyadicGrid2D(3)
    for kind in ("jsw_x", "jsw_y", "conv_x", "mart_y"):
        assert np.allclose(square_function(np.full((8, 8), 3.0), kind, grid), 0, atol=1e-14)


# ------------------------------------------------------------ decomposition ---


def test_decomposition_constant_g_is_zero(rng):
    grid = DyadicGrid2D(3)
    d = difference_decomposition(rng.standard_normal((8, 8)), np.full((8, 8), 1.5), grid)
    assert np.allclose(d["lhs"], 0, atol=1e-13) and np.allclose(d["rhs"], 0, atol=1e-13)


def test_decomposition_constant_f_is_boundary(rng):
    grid = DyadicGrid2D(3)
    g = rng.standard_normal((8, 8))
    d = difference_decomposition(np.full((8, 8), 2.0), g, grid)
    pn = g
    p0 = smooth_projection(g, 1, KernelSpec("triangle", 0), grid)
    boundary = 2 * (pn - grid.cond_y(g, 3)) - 2 * (p0 - grid.cond_y(g, 0))
    assert np.allclose(d["lhs"], boundary, atol=1e-13)
    assert np.allclose(d["rhs"], boundary, atol=1e-13)


@pytest.mark.parametrize("kernels", ["box", "triangle"])
def test_decomposition_identity_and_majorant(kernels, rng):
    grid = DyadicGrid2D(3)
    for _ in range(5):
        f, g = rng.standard_normal((8, 8)), rng.standard_normal((8, 8))
        out = difference_decomposition_check(f, g, grid, kernels=kernels)
        assert out["gap"] <= 1e-10 and out["majorant_excess"] <= 1e-10 and out["pass"]


# ---------------------------------------------------------------- ratios ---


def test_norm_ratio_homogeneity(rng):
    grid = DyadicGrid2D(3)
    f, g = rng.standard_normal((8, 8)), rng.standard_normal((8, 8))
    for op in ("twisted", "martingale"):
        base = norm_ratio(f, g, E, grid, op)
        assert norm_ratio(4 * f, 0.5 * g, E, grid, op) == base
        assert norm_ratio(3.3 * f, -1.7 * g, E, grid, op) == pytest.approx(base, rel=1e-12)
    assert norm_ratio(np.zeros((8, 8)), g, E, grid) == 0.0
    with pytest.raises(ProbabilityError):
        norm_ratio(f, g, E, grid, "other")


def test_grid_validation():
    grid = DyadicGrid2D(2)
    with pytest.raises(ProbabilityError):
        grid.check(np.zeros((4, 3)))
    with pytest.raises(ProbabilityError):
        grid.check(np.full((4, 4), np.nan))
    with pytest.raises(ProbabilityError):
        DyadicGrid2D(13)


def test_commuting_gap_and_grid_pair(rng):
    grid = DyadicGrid2D(3)
    assert commuting_gap(rng.standard_normal((8, 8)), grid) <= 1e-12
    assert uniform_growth_constant(grid.pair) == 4


def test_grid_function_csv_roundtrip(tmp_path, rng):
    gf = GridFunction(rng.standard_normal((4, 4)), 2)
    path = tmp_path / "g.csv"
    gf.to_csv(path)
    back = GridFunction.from_csv(path)
    assert back.depth == 2 and np.array_equal(back.values, gf.values)
    assert np.array_equal(GridFunction.from_csv(gf.to_csv()).values, gf.values)
    with pytest.raises(ProbabilityError):
        GridFunction.from_csv("1,2\n3,4\n")


def test_sampled_rectangles_refine_consistently(rng):
    func = random_rectangles(np.random.default_rng(3))
    coarse = sample_continuum(func, DyadicGrid2D(3))
    fine = sample_continuum(func, DyadicGrid2D(6))
    assert coarse.shape == (8, 8) and fine.shape == (64, 64)
    # averages over coarse cells approximate the coarse samples up to edge cells
    avg = fine.reshape(8, 8, 8, 8).mean(axis=(1, 3))
    assert np.mean(np.abs(avg - coarse)) < 0.5 * np.abs(coarse).max()
