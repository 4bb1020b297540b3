"""Dyadic twisted paraproducts on the periodic ``2^n x 2^n`` grid.

Axis 0 is ``x`` (first coordinate), axis 1 is ``y``. ``E(h|F_k)`` averages
``h`` over dyadic ``x``-intervals of ``2^{n-k}`` cells and ``E(h|G_k)`` does the
same in ``y``. The smooth projections replace these averages by periodic
convolutions with a normalized kernel of width ``2^{n-k}`` cells, i.e. scale
``2^{-k}`` on the unit torus.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .probspace import FiniteProbSpace, ProbabilityError, ProductFiltrationPair

KINDS = ("box", "triangle")
SQUARE_KINDS = ("mart_x", "mart_y", "conv_x", "conv_y", "jsw_x", "jsw_y")


@dataclass(frozen=True)
class DyadicGrid2D:
    depth: int

    def __post_init__(self):
        if not 0 <= self.depth <= 12:
            raise ProbabilityError(f"depth {self.depth} outside 0..12")

    @property
    def side(self) -> int:
        return 2**self.depth

    @property
    def shape(self) -> tuple[int, int]:
        return (self.side, self.side)

    @property
    def cell_measure(self) -> float:
        return 4.0**-self.depth

    def check(self, h) -> np.ndarray:
        h = np.asarray(h, dtype=float)
        if h.shape != self.shape:
            raise ProbabilityError(f"grid function has shape {h.shape}, expected {self.shape}")
        if not np.all(np.isfinite(h)):
            raise ProbabilityError("grid function values must be finite")
        return h

    def _avg(self, h: np.ndarray, axis: int, k: int) -> np.ndarray:
        if not 0 <= k <= self.depth:
            raise ProbabilityError(f"scale {k} outside 0..{self.depth}")
        h = self.check(h)
        width = 2 ** (self.depth - k)
        moved = np.moveaxis(h, axis, 0)
        blocks = moved.reshape(2**k, width, -1).mean(axis=1)
        return np.moveaxis(np.repeat(blocks, width, axis=0), 0, axis)

    def cond_x(self, h, k: int) -> np.ndarray:
        """``E(h|F_k)``."""
        return self._avg(h, 0, k)

    def cond_y(self, h, k: int) -> np.ndarray:
        """``E(h|G_k)``."""
        return self._avg(h, 1, k)

    def norm(self, h, p: float) -> float:
        h = np.abs(self.check(h))
        if np.isinf(p):
            return float(h.max())
        return float((h**p).mean() ** (1.0 / p))

    @cached_property
    def pair(self) -> ProductFiltrationPair:
        """The same filtrations as a :class:`ProductFiltrationPair` on cell indices."""
        from .fuzz import dyadic_filtration

        f = dyadic_filtration(self.depth)
        sp = FiniteProbSpace.uniform(self.side)
        return ProductFiltrationPair(sp, sp, f, f)


@dataclass(frozen=True)
class GridFunction:
    """Values on the cells of a :class:`DyadicGrid2D`, row-major in ``x``."""

    values: np.ndarray
    depth: int

    def __post_init__(self):
        v = DyadicGrid2D(self.depth).check(self.values)
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        buf.write(f"# depth={self.depth}\n")
        w = csv.writer(buf, lineterminator="\n")
        for row in self.values:
            w.writerow([repr(float(v)) for v in row])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, source) -> "GridFunction":
        # a Path, or a one-line string naming a file; anything else is CSV text
        is_file = isinstance(source, Path) or ("\n" not in source and Path(source).is_file())
        text = Path(source).read_text() if is_file else source
        lines = text.splitlines()
        if not lines or not lines[0].startswith("# depth="):
            raise ProbabilityError("missing '# depth=N' header")
        depth = int(lines[0].split("=", 1)[1])
        rows = [list(map(float, r)) for r in csv.reader(lines[1:]) if r]
        return cls(np.array(rows, dtype=float), depth)


@dataclass(frozen=True)
class KernelSpec:
    """Normalized periodic kernel at scale index ``k`` (width ``2^{n-k}`` cells)."""

    kind: str
    k: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ProbabilityError(f"kernel kind must be one of {KINDS}")

    def weights(self, depth: int) -> tuple[np.ndarray, np.ndarray]:
        """Offsets and weights; nonnegative, summing to 1."""
        if not 0 <= self.k <= depth:
            raise ProbabilityError(f"scale {self.k} outside 0..{depth}")
        w = 2 ** (depth - self.k)
        if self.kind == "box":
            offsets = np.arange(-(w // 2), w - w // 2)
            weights = np.full(w, 1.0 / w)
        else:
            offsets = np.arange(-(w - 1), w)
            weights = (w - np.abs(offsets)) / float(w * w)
        return offsets, weights


def smooth_projection(h, axis: int, spec: KernelSpec, grid: DyadicGrid2D) -> np.ndarray:
    """Periodic partial convolution ``sum_u h(x - u) phi(u)`` along ``axis`` (0 = x, 1 = y)."""
    if axis not in (0, 1):
        raise ProbabilityError(f"axis must be 0 or 1, got {axis}")
    h = grid.check(h)
    offsets, weights = spec.weights(grid.depth)
    side = grid.side
    # fold offsets that wrap onto the same cell
    folded = np.zeros(side)
    np.add.at(folded, np.mod(offsets, side), weights)
    out = np.zeros_like(h)
    for d in np.flatnonzero(folded):
        out += folded[d] * np.roll(h, int(d), axis=axis)
    return out


def _n_terms(grid: DyadicGrid2D, n_terms) -> int:
    n = grid.depth if n_terms is None else int(n_terms)
    if not 0 <= n <= grid.depth:
        raise ProbabilityError(f"n_terms {n} outside 0..{grid.depth}")
    return n


def martingale_paraproduct(f, g, grid: DyadicGrid2D, n_terms: int | None = None) -> np.ndarray:
    """``sum_{k<n} E(f|F_k) (E(g|G_{k+1}) - E(g|G_k))``."""
    n = _n_terms(grid, n_terms)
    f, g = grid.check(f), grid.check(g)
    out = np.zeros(grid.shape)
    for k in range(n):
        out += grid.cond_x(f, k) * (grid.cond_y(g, k + 1) - grid.cond_y(g, k))
    return out


def _kinds(kernels) -> tuple[str, str]:
    if isinstance(kernels, str):
        return kernels, kernels
    a, b = kernels
    return a, b


def twisted_paraproduct(f, g, grid: DyadicGrid2D, kernels="triangle",
                        n_terms: int | None = None) -> np.ndarray:
    """``sum_{k<n} (P^1_k f) (P^2_{k+1} g - P^2_k g)``; ``kernels`` is a kind or a (x, y) pair."""
    n = _n_terms(grid, n_terms)
    kx, ky = _kinds(kernels)
    f, g = grid.check(f), grid.check(g)
    out = np.zeros(grid.shape)
    py = [smooth_projection(g, 1, KernelSpec(ky, k), grid) for k in range(n + 1)]
    for k in range(n):
        out += smooth_projection(f, 0, KernelSpec(kx, k), grid) * (py[k + 1] - py[k])
    return out


def square_function(h, kind: str, grid: DyadicGrid2D, kernel: str = "triangle") -> np.ndarray:
    """Square functions over the scales of the grid.

    ``mart``: ``(sum_{k<n} |E_{k+1} h - E_k h|^2)^{1/2}``;
    ``conv``: ``(sum_{k<n} |P_{k+1} h - P_k h|^2)^{1/2}``;
    ``jsw``: ``(sum_{k<=n} |P_k h - E_k h|^2)^{1/2}``.
    The suffix selects the axis.
    """
    if kind not in SQUARE_KINDS:
        raise ProbabilityError(f"kind must be one of {SQUARE_KINDS}")
    h = grid.check(h)
    family, ax = kind.split("_")
    axis = 0 if ax == "x" else 1
    n = grid.depth
    cond = grid.cond_x if axis == 0 else grid.cond_y

    def proj(k):
        return smooth_projection(h, axis, KernelSpec(kernel, k), grid)

    acc = np.zeros(grid.shape)
    if family == "mart":
        for k in range(n):
            acc += (cond(h, k + 1) - cond(h, k)) ** 2
    elif family == "conv":
        for k in range(n):
            acc += (proj(k + 1) - proj(k)) ** 2
    else:
        for k in range(n + 1):
            acc += (proj(k) - cond(h, k)) ** 2
    return np.sqrt(acc)


def difference_decomposition(f, g, grid: DyadicGrid2D, kernels="triangle",
                             n_terms: int | None = None) -> dict:
    """The four-term expansion of ``T_n - T~_n`` and its pointwise majorant."""
    n = _n_terms(grid, n_terms)
    kx, ky = _kinds(kernels)
    f, g = grid.check(f), grid.check(g)
    Pf = [smooth_projection(f, 0, KernelSpec(kx, k), grid) for k in range(n + 1)]
    Pg = [smooth_projection(g, 1, KernelSpec(ky, k), grid) for k in range(n + 1)]
    Ef = [grid.cond_x(f, k) for k in range(n + 1)]
    Eg = [grid.cond_y(g, k) for k in range(n + 1)]
    first = sum((Pf[k] - Ef[k]) * (Pg[k + 1] - Pg[k]) for k in range(n)) if n else 0.0
    second = sum((Ef[k + 1] - Ef[k]) * (Pg[k + 1] - Eg[k + 1]) for k in range(n)) if n else 0.0
    boundary_n = Ef[n] * (Pg[n] - Eg[n])
    boundary_0 = Ef[0] * (Pg[0] - Eg[0])
    rhs = first - second + boundary_n - boundary_0
    lhs = twisted_paraproduct(f, g, grid, kernels, n) - martingale_paraproduct(f, g, grid, n)

    def ssum(terms):
        return np.sqrt(sum(t * t for t in terms)) if terms else np.zeros(grid.shape)

    jsw_f = ssum([Pf[k] - Ef[k] for k in range(n + 1)])
    jsw_g = ssum([Pg[k] - Eg[k] for k in range(n + 1)])
    conv_g = ssum([Pg[k + 1] - Pg[k] for k in range(n)])
    mart_f = ssum([Ef[k + 1] - Ef[k] for k in range(n)])
    majorant = (jsw_f * conv_g + mart_f * jsw_g
                + np.abs(Ef[n]) * (np.abs(Pg[n]) + np.abs(Eg[n]))
                + np.abs(Ef[0]) * (np.abs(Pg[0]) + np.abs(Eg[0])))
    return {"lhs": lhs, "rhs": rhs, "majorant": majorant,
            "boundary": np.abs(boundary_n - boundary_0).max() if n else 0.0}


def difference_decomposition_check(f, g, grid: DyadicGrid2D, n_terms: int | None = None,
                                   kernels="triangle", tol: float = 1e-10) -> dict:
    """Gap of the four-term identity and worst violation of the pointwise majorant."""
    d = difference_decomposition(f, g, grid, kernels, n_terms)
    gap = float(np.max(np.abs(d["lhs"] - d["rhs"])))
    scale = max(1.0, float(np.max(d["majorant"])))
    excess = float(np.max(np.abs(d["lhs"]) - d["majorant"]))
    return {"gap": gap, "majorant_excess": excess,
            "pass": bool(gap <= tol * scale and excess <= tol * scale)}


def norm_ratio(f, g, exponents, grid: DyadicGrid2D, operator: str = "twisted",
               kernels="triangle", n_terms: int | None = None) -> float:
    """``||T(f,g)||_r / (||f||_p ||g||_q)`` with normalized cell measure; 0 if a norm vanishes."""
    p, q, r = exponents.p, exponents.q, exponents.r
    if operator == "twisted":
        t = twisted_paraproduct(f, g, grid, kernels, n_terms)
    elif operator == "martingale":
        t = martingale_paraproduct(f, g, grid, n_terms)
    else:
        raise ProbabilityError(f"operator must be 'twisted' or 'martingale', got {operator!r}")
    den = grid.norm(f, p) * grid.norm(g, q)
    if den == 0:
        return 0.0
    return grid.norm(t, r) / den


def commuting_gap(h, grid: DyadicGrid2D) -> float:
    """Max over scale pairs of ``|E(E(h|F_k)|G_l) - E(E(h|G_l)|F_k)|``."""
    h = grid.check(h)
    worst = 0.0
    for k in range(grid.depth + 1):
        for l in range(grid.depth + 1):
            a = grid.cond_y(grid.cond_x(h, k), l)
            b = grid.cond_x(grid.cond_y(h, l), k)
            worst = max(worst, float(np.max(np.abs(a - b))))
    return worst


def sample_continuum(func, grid: DyadicGrid2D) -> np.ndarray:
    """Evaluate ``func(x, y)`` at cell centers of the unit torus."""
    c = (np.arange(grid.side) + 0.5) / grid.side
    x, y = np.meshgrid(c, c, indexing="ij")
    return np.asarray(func(x, y), dtype=float)


def random_rectangles(rng: np.random.Generator, count: int = 4):
    """A continuum test function: signed sum of indicators of random rectangles on the torus."""
    lo = rng.random((count, 2))
    size = rng.uniform(0.1, 0.6, size=(count, 2))
    amp = rng.standard_normal(count)

    def func(x, y):
        out = np.zeros_like(x)
        for (x0, y0), (w, h), a in zip(lo, size, amp):
            inx = np.mod(x - x0, 1.0) < w
            iny = np.mod(y - y0, 1.0) < h
            out += a * (inx & iny)
        return out

    return func
