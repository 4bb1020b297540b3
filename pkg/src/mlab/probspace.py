"""Finite probability spaces with partition-generated sigma-algebras.

Every sigma-algebra here is generated by a partition of the outcome set, so a
conditional expectation is a mass-weighted block average. Product spaces keep
their two coordinates as the two axes of a 2-D array, which lets the fiber
operators act on one coordinate at a time.

Two numeric modes are supported. Float mode stores masses and values as
``float64``. Exact mode stores them as ``fractions.Fraction`` inside object
arrays; all arithmetic then stays rational, which is how the identity suites
get gaps of exactly zero.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

MASS_TOL = 1e-12
EXACT_MAX_OUTCOMES = 64


class ProbabilityError(ValueError):
    """Invalid probabilistic object or incompatible operands."""


class DimensionMismatch(ProbabilityError):
    pass


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


def to_fraction_array(values) -> np.ndarray:
    """Convert ``values`` to an object array of ``Fraction`` (exact binary value for floats)."""
    arr = np.asarray(values)
    out = np.empty(arr.shape, dtype=object)
    flat_in = arr.ravel()
    flat_out = out.ravel()
    for i, v in enumerate(flat_in):
        flat_out[i] = v if isinstance(v, Fraction) else Fraction(v)
    return out


def is_exact(a: np.ndarray) -> bool:
    return np.asarray(a).dtype == object


def as_float(a) -> np.ndarray:
    return np.asarray(a, dtype=float)


# --------------------------------------------------------------------------
# spaces, partitions, filtrations
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FiniteProbSpace:
    """Outcomes ``0..size-1`` (row-major over ``shape``) with strictly positive masses."""

    mass: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.mass)
        if m.size == 0:
            raise ProbabilityError("a probability space needs at least one outcome")
        if m.dtype != object:
            m = m.astype(float)
            if not np.all(np.isfinite(m)):
                raise ProbabilityError("masses must be finite")
        if not all(v > 0 for v in m.ravel()):
            raise ProbabilityError("all masses must be strictly positive")
        total = sum(m.ravel()) if m.dtype == object else float(m.sum())
        if m.dtype == object:
            if total != 1:
                raise ProbabilityError(f"masses sum to {total}, not 1")
        elif abs(total - 1.0) > MASS_TOL:
            raise ProbabilityError(f"masses sum to {total!r}, not 1")
        object.__setattr__(self, "mass", _frozen(m))

    @classmethod
    def uniform(cls, shape, exact: bool = False) -> "FiniteProbSpace":
        shape = (shape,) if np.isscalar(shape) else tuple(shape)
        n = int(np.prod(shape))
        if exact:
            return cls(np.full(shape, Fraction(1, n), dtype=object))
        return cls(np.full(shape, 1.0 / n))

    @classmethod
    def from_weights(cls, weights, exact: bool = False) -> "FiniteProbSpace":
        """Normalise positive ``weights`` into a probability vector."""
        w = np.asarray(weights)
        if exact:
            w = to_fraction_array(w)
            return cls(w / sum(w.ravel()))
        w = w.astype(float)
        return cls(w / w.sum())

    @property
    def size(self) -> int:
        return self.mass.size

    @property
    def shape(self) -> tuple:
        return self.mass.shape

    @property
    def exact(self) -> bool:
        return self.mass.dtype == object

    def product(self, other: "FiniteProbSpace") -> "FiniteProbSpace":
        if self.exact != other.exact:
            raise ProbabilityError("cannot mix exact and float spaces")
        if self.mass.ndim != 1 or other.mass.ndim != 1:
            raise ProbabilityError("product is defined for one-dimensional factors")
        return FiniteProbSpace(np.multiply.outer(self.mass, other.mass))

    def coerce(self, values) -> np.ndarray:
        """Return ``values`` shaped like the space in this space's numeric mode."""
        v = np.asarray(values)
        if v.shape != self.shape:
            if v.size != self.size:
                raise DimensionMismatch(f"expected {self.size} values, got {v.size}")
            v = v.reshape(self.shape)
        if self.exact:
            return to_fraction_array(v)
        return v.astype(float)

    def expect(self, values) -> float | Fraction:
        v = np.asarray(values)
        if v.shape != self.shape:
            raise DimensionMismatch(f"shape {v.shape} does not match space {self.shape}")
        return (self.mass * v).sum()

    def __eq__(self, other):
        return (
            isinstance(other, FiniteProbSpace)
            and self.shape == other.shape
            and bool(np.all(self.mass == other.mass))
        )

    __hash__ = object.__hash__


@dataclass(frozen=True, eq=False)
class Partition:
    """A partition of ``0..size-1`` in canonical form.

    Block ids are renumbered in order of each block's smallest member, so two
    partitions with the same blocks compare equal however they were labelled.
    """

    block_of: np.ndarray
    block_count: int = field(init=False)

    def __post_init__(self):
        raw = np.asarray(self.block_of).ravel()
        if raw.size == 0:
            raise ProbabilityError("empty partition")
        _, first, inverse = np.unique(raw, return_index=True, return_inverse=True)
        rank = np.empty(first.size, dtype=np.int64)
        rank[np.argsort(first, kind="stable")] = np.arange(first.size)
        object.__setattr__(self, "block_of", _frozen(rank[inverse].astype(np.int64)))
        object.__setattr__(self, "block_count", int(first.size))

    @classmethod
    def trivial(cls, size: int) -> "Partition":
        return cls(np.zeros(size, dtype=np.int64))

    @classmethod
    def discrete(cls, size: int) -> "Partition":
        return cls(np.arange(size))

    @classmethod
    def from_blocks(cls, blocks: Iterable[Iterable[int]], size: int) -> "Partition":
        labels = np.full(size, -1, dtype=np.int64)
        for b, members in enumerate(blocks):
            for i in members:
                if labels[i] != -1:
                    raise ProbabilityError(f"outcome {i} appears in two blocks")
                labels[i] = b
        if np.any(labels < 0):
            raise ProbabilityError("blocks do not cover every outcome")
        return cls(labels)

    @property
    def size(self) -> int:
        return self.block_of.size

    def blocks(self) -> list[np.ndarray]:
        order = np.argsort(self.block_of, kind="stable")
        cuts = np.cumsum(np.bincount(self.block_of, minlength=self.block_count))[:-1]
        return np.split(order, cuts)

    def refines(self, coarser: "Partition") -> bool:
        """True if every block of ``self`` lies inside a block of ``coarser``."""
        if coarser.size != self.size:
            raise DimensionMismatch("partitions live on different outcome sets")
        parent = np.full(self.block_count, -1, dtype=np.int64)
        for child, par in zip(self.block_of, coarser.block_of):
            if parent[child] == -1:
                parent[child] = par
            elif parent[child] != par:
                return False
        return True

    def is_measurable(self, values) -> bool:
        """True if ``values`` is constant on every block."""
        v = np.asarray(values).ravel()
        if v.size != self.size:
            raise DimensionMismatch("values and partition sizes differ")
        first = np.full(self.block_count, -1, dtype=np.int64)
        for i, b in enumerate(self.block_of):
            if first[b] == -1:
                first[b] = i
        return bool(np.all(v == v[first[self.block_of]]))

    def __eq__(self, other):
        return (
            isinstance(other, Partition)
            and self.size == other.size
            and bool(np.array_equal(self.block_of, other.block_of))
        )

    def __hash__(self):
        return hash(self.block_of.tobytes())

    def __repr__(self):
        return f"Partition({[list(map(int, b)) for b in self.blocks()]})"


@dataclass(frozen=True)
class Filtration:
    """Increasing sequence of partitions, index ``k = 0..n``."""

    steps: tuple

    def __post_init__(self):
        steps = tuple(self.steps)
        if not steps:
            raise ProbabilityError("a filtration needs at least one step")
        size = steps[0].size
        for k in range(1, len(steps)):
            if steps[k].size != size:
                raise DimensionMismatch("filtration steps live on different outcome sets")
            if not steps[k].refines(steps[k - 1]):
                raise ProbabilityError(f"step {k} does not refine step {k - 1}")
        object.__setattr__(self, "steps", steps)

    @property
    def horizon(self) -> int:
        return len(self.steps) - 1

    @property
    def size(self) -> int:
        return self.steps[0].size

    def __getitem__(self, k: int) -> Partition:
        return self.steps[k]

    def __len__(self):
        return len(self.steps)


@dataclass(frozen=True, eq=False)
class RandomVariable:
    values: np.ndarray
    space: FiniteProbSpace

    def __post_init__(self):
        v = self.space.coerce(self.values)
        if not self.space.exact and not np.all(np.isfinite(v)):
            raise ProbabilityError("random variable values must be finite")
        object.__setattr__(self, "values", _frozen(v))

    def _other(self, other):
        if isinstance(other, RandomVariable):
            if other.space is not self.space and other.space != self.space:
                raise DimensionMismatch("random variables live on different spaces")
            return other.values
        return other

    def __add__(self, other):
        return RandomVariable(self.values + self._other(other), self.space)

    __radd__ = __add__

    def __sub__(self, other):
        return RandomVariable(self.values - self._other(other), self.space)

    def __rsub__(self, other):
        return RandomVariable(self._other(other) - self.values, self.space)

    def __mul__(self, other):
        return RandomVariable(self.values * self._other(other), self.space)

    __rmul__ = __mul__

    def __neg__(self):
        return RandomVariable(-self.values, self.space)

    def __abs__(self):
        return RandomVariable(np.abs(self.values), self.space)

    def expect(self):
        return self.space.expect(self.values)


# --------------------------------------------------------------------------
# conditional expectation and partition algebra
# --------------------------------------------------------------------------


def _block_sums(values: np.ndarray, labels: np.ndarray, count: int) -> np.ndarray:
    if values.dtype == object:
        out = np.array([Fraction(0)] * count, dtype=object)
        for v, b in zip(values, labels):
            out[b] += v
        return out
    return np.bincount(labels, weights=values, minlength=count)


def block_average(values, mass, partition: Partition) -> np.ndarray:
    """Mass-weighted average of ``values`` over each block, broadcast back to outcomes."""
    v = np.asarray(values)
    m = np.asarray(mass)
    shape = v.shape
    vf, mf = v.ravel(), m.ravel()
    if vf.size != partition.size or mf.size != partition.size:
        raise DimensionMismatch(
            f"values ({vf.size}), masses ({mf.size}) and partition ({partition.size}) differ"
        )
    if vf.dtype != object and mf.dtype == object:
        vf = to_fraction_array(vf)
    if vf.dtype == object and mf.dtype != object:
        vf = vf.astype(float)
    num = _block_sums(mf * vf, partition.block_of, partition.block_count)
    den = _block_sums(mf, partition.block_of, partition.block_count)
    return (num / den)[partition.block_of].reshape(shape)


def cond_exp(x: RandomVariable, p: Partition) -> RandomVariable:
    """Conditional expectation of ``x`` given the sigma-algebra generated by ``p``."""
    if p.size != x.space.size:
        raise DimensionMismatch(
            f"partition has {p.size} outcomes, variable has {x.space.size}"
        )
    return RandomVariable(block_average(x.values, x.space.mass, p), x.space)


def averaging_matrix(p: Partition, mass) -> np.ndarray:
    """Matrix ``M`` with ``(M @ u)[i] = E(u | p)(i)``; rows sum to one."""
    m = np.asarray(mass).ravel()
    if m.size != p.size:
        raise DimensionMismatch("mass and partition sizes differ")
    same = p.block_of[:, None] == p.block_of[None, :]
    block_mass = _block_sums(m, p.block_of, p.block_count)[p.block_of]
    if m.dtype == object:
        out = np.empty((m.size, m.size), dtype=object)
        for i in range(m.size):
            for j in range(m.size):
                out[i, j] = m[j] / block_mass[i] if same[i, j] else Fraction(0)
        return out
    return np.where(same, m[None, :] / block_mass[:, None], 0.0)


def sigma_intersect(p: Partition, q: Partition) -> Partition:
    """Finest common coarsening: atoms of the intersection of the two sigma-algebras.

    Blocks of ``p`` and ``q`` that overlap are glued together; the connected
    components of that overlap graph are the result blocks.
    """
    if p.size != q.size:
        raise DimensionMismatch("partitions live on different outcome sets")
    n = p.size
    rows = np.concatenate([np.arange(n), np.arange(n)])
    cols = np.concatenate([n + p.block_of, n + p.block_count + q.block_of])
    nodes = n + p.block_count + q.block_count
    graph = coo_matrix((np.ones(rows.size), (rows, cols)), shape=(nodes, nodes))
    _, labels = connected_components(graph, directed=False)
    return Partition(labels[:n])


def join(p: Partition, q: Partition) -> Partition:
    """Coarsest common refinement (the sigma-algebra generated by both)."""
    if p.size != q.size:
        raise DimensionMismatch("partitions live on different outcome sets")
    return Partition(p.block_of * q.block_count + q.block_of)


def lp_norm(x, p: float, mass=None) -> float:
    """``(E|x|^p)^(1/p)``; ``p = inf`` gives the max (every outcome has positive mass)."""
    if isinstance(x, RandomVariable):
        values, mass = x.values, x.space.mass
    else:
        values = x
    v = np.abs(as_float(values))
    if p < 1:
        raise ProbabilityError(f"exponent must be >= 1, got {p}")
    if np.isinf(p):
        return float(v.max()) if v.size else 0.0
    m = as_float(mass)
    if v.shape != m.shape:
        raise DimensionMismatch("values and masses differ in shape")
    return float((m * v**p).sum() ** (1.0 / p))


# --------------------------------------------------------------------------
# product filtrations and fiber operators
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ProductFiltrationPair:
    """Horizontal and vertical filtrations on a product of two finite spaces.

    ``F(k)`` has atoms ``A_k-block x {w2}``, ``G(k)`` has atoms ``{w1} x B_k-block``
    and ``H(k) = F(k) & G(k)`` has atoms ``A_k-block x B_k-block``.
    """

    space1: FiniteProbSpace
    space2: FiniteProbSpace
    filt1: Filtration
    filt2: Filtration

    def __post_init__(self):
        if self.filt1.horizon != self.filt2.horizon:
            raise ProbabilityError("the two filtrations must have the same horizon")
        if self.filt1.size != self.space1.size or self.filt2.size != self.space2.size:
            raise DimensionMismatch("filtration and space sizes differ")
        if self.space1.exact != self.space2.exact:
            raise ProbabilityError("cannot mix exact and float factors")

    @property
    def horizon(self) -> int:
        return self.filt1.horizon

    @property
    def shape(self) -> tuple[int, int]:
        return (self.space1.size, self.space2.size)

    @property
    def exact(self) -> bool:
        return self.space1.exact

    @cached_property
    def space(self) -> FiniteProbSpace:
        return self.space1.product(self.space2)

    def _check_k(self, k: int):
        if not 0 <= k <= self.horizon:
            raise ProbabilityError(f"step {k} outside 0..{self.horizon}")

    def F(self, k: int) -> Partition:
        self._check_k(k)
        n1, n2 = self.shape
        a = self.filt1[k].block_of
        return Partition((a[:, None] * n2 + np.arange(n2)[None, :]).ravel())

    def G(self, k: int) -> Partition:
        self._check_k(k)
        n1, n2 = self.shape
        b = self.filt2[k]
        return Partition((np.arange(n1)[:, None] * b.block_count + b.block_of[None, :]).ravel())

    def H(self, k: int) -> Partition:
        self._check_k(k)
        a, b = self.filt1[k], self.filt2[k]
        return Partition((a.block_of[:, None] * b.block_count + b.block_of[None, :]).ravel())

    @cached_property
    def _ma(self) -> tuple:
        return tuple(averaging_matrix(p, self.space1.mass) for p in self.filt1.steps)

    @cached_property
    def _mb(self) -> tuple:
        return tuple(averaging_matrix(p, self.space2.mass) for p in self.filt2.steps)

    def MA(self, k: int) -> np.ndarray:
        """Averaging matrix of ``A_k`` on the first factor."""
        self._check_k(k)
        return self._ma[k]

    def MB(self, k: int) -> np.ndarray:
        self._check_k(k)
        return self._mb[k]

    def coerce(self, values) -> np.ndarray:
        if isinstance(values, RandomVariable):
            values = values.values
        return self.space.coerce(values)

    def variable(self, values) -> RandomVariable:
        return RandomVariable(values, self.space)

    def cond_F(self, w, k: int) -> np.ndarray:
        return self.MA(k) @ self.coerce(w)

    def cond_G(self, w, k: int) -> np.ndarray:
        return self.coerce(w) @ self.MB(k).T

    def cond_H(self, w, k: int) -> np.ndarray:
        return self.MA(k) @ self.coerce(w) @ self.MB(k).T


def fiber_cond_exp(pair: ProductFiltrationPair, w, axis: int, k: int) -> RandomVariable:
    """Condition in one coordinate only (``axis`` 1 or 2), holding the other fixed."""
    if axis not in (1, 2):
        raise ProbabilityError(f"axis must be 1 or 2, got {axis}")
    vals = pair.cond_F(w, k) if axis == 1 else pair.cond_G(w, k)
    return pair.variable(vals)


def fiber_diff(pair: ProductFiltrationPair, w, axis: int, k: int) -> RandomVariable:
    """Fiber conditional expectation at ``k+1`` minus at ``k``."""
    if k + 1 > pair.horizon:
        raise ProbabilityError(f"step {k + 1} beyond horizon {pair.horizon}")
    hi = fiber_cond_exp(pair, w, axis, k + 1)
    lo = fiber_cond_exp(pair, w, axis, k)
    return hi - lo


# --------------------------------------------------------------------------
# operator identities of the fiber calculus
# --------------------------------------------------------------------------


def _max_abs(a) -> float | Fraction:
    a = np.asarray(a)
    if a.size == 0:
        return 0
    if a.dtype == object:
        return max(abs(v) for v in a.ravel())
    return float(np.max(np.abs(a)))


def nested_average_gap(filt: Filtration, mass, k: int, v) -> float | Fraction:
    """Gap between the two ways of averaging a two-point function over an atom.

    ``v[w1, w2]`` on the square of a factor space. Averaging ``w2`` over the
    atom of ``w1`` and then ``w1`` over the atom of ``w`` must agree with
    averaging both variables over the atom of ``w``.
    """
    m = averaging_matrix(filt[k], mass)
    v = np.asarray(v)
    inner = (m * v).sum(axis=1)
    lhs = m @ inner
    rhs = np.einsum("wa,wb,ab->w", m, m, v)
    return _max_abs(lhs - rhs)


def fiber_projection_gaps(pair: ProductFiltrationPair, w, k: int, l: int) -> dict:
    """Fiber averages versus partition conditional expectations on the product.

    Returns the max gaps for: axis-1 fiber vs ``E(.|F_k)``, axis-2 fiber vs
    ``E(.|G_l)``, the two orders of iterated fiber averaging, and iterated
    averaging vs ``E(.|F_k & G_l)`` with the intersection computed in general.
    """
    wv = pair.coerce(w)
    mass = pair.space.mass
    f_k = block_average(wv, mass, pair.F(k))
    g_l = block_average(wv, mass, pair.G(l))
    ab = pair.MA(k) @ (wv @ pair.MB(l).T)
    ba = (pair.MA(k) @ wv) @ pair.MB(l).T
    inter = sigma_intersect(pair.F(k), pair.G(l))
    h = block_average(wv, mass, inter)
    return {
        "fiber1_vs_F": _max_abs(pair.cond_F(wv, k) - f_k),
        "fiber2_vs_G": _max_abs(pair.cond_G(wv, l) - g_l),
        "fiber_order": _max_abs(ab - ba),
        "fiber_vs_intersection": _max_abs(ab - h),
    }


def increment_product_gap(filt: Filtration, mass, k: int, u1, u2) -> float | Fraction:
    """Residual of the identity that averages a product of two increments.

    ``E_k[(E_{k+1}u1 - E_k u1)(E_{k+1}u2 - E_k u2)]`` equals
    ``E_k[E_{k+1}u1 * E_{k+1}u2 - E_k u1 * E_k u2]``.
    """
    lo = averaging_matrix(filt[k], mass)
    hi = averaging_matrix(filt[k + 1], mass)
    u1, u2 = np.asarray(u1), np.asarray(u2)
    lhs = lo @ ((hi @ u1 - lo @ u1) * (hi @ u2 - lo @ u2))
    rhs = lo @ ((hi @ u1) * (hi @ u2) - (lo @ u1) * (lo @ u2))
    return _max_abs(lhs - rhs)


def commuting_deviation(space: FiniteProbSpace, p: Partition, q: Partition,
                        rng: np.random.Generator, samples: int = 8) -> dict:
    """Test whether conditional expectations on ``p`` and ``q`` commute.

    Random variables probe ``E(E(W|p)|q) = E(E(W|q)|p) = E(W|p & q)``; random
    unions of blocks probe conditional independence of ``p`` and ``q`` given
    their intersection. Returns the max deviation of each.
    """
    inter = sigma_intersect(p, q)
    mass = space.mass
    basis = [np.eye(space.size)[i].reshape(space.shape) for i in range(space.size)]
    probes = basis + [rng.standard_normal(space.shape) for _ in range(samples)]
    if space.exact:
        probes = [to_fraction_array(w) for w in probes]
    commute = 0.0
    for w in probes:
        pq = block_average(block_average(w, mass, p), mass, q)
        qp = block_average(block_average(w, mass, q), mass, p)
        h = block_average(w, mass, inter)
        commute = max(commute, float(_max_abs(pq - qp)), float(_max_abs(pq - h)))
    indep = 0.0
    for _ in range(max(samples, 4)):
        a = rng.random(p.block_count) < 0.5
        b = rng.random(q.block_count) < 0.5
        ia = a[p.block_of].reshape(space.shape).astype(int)
        ib = b[q.block_of].reshape(space.shape).astype(int)
        if space.exact:
            ia, ib = to_fraction_array(ia), to_fraction_array(ib)
        joint = block_average(ia * ib, mass, inter)
        split = block_average(ia, mass, inter) * block_average(ib, mass, inter)
        indep = max(indep, float(_max_abs(joint - split)))
    return {"commuting": commute, "independence": indep, "max": max(commute, indep)}


def check_commuting(pair: ProductFiltrationPair, k: int, l: int, sample_count: int = 8,
                    rng: np.random.Generator | None = None) -> dict:
    """Commuting and conditional-independence deviations for ``F_k`` and ``G_l``."""
    rng = np.random.default_rng(0) if rng is None else rng
    return commuting_deviation(pair.space, pair.F(k), pair.G(l), rng, sample_count)


# --------------------------------------------------------------------------
# JSON serialization
# --------------------------------------------------------------------------


def encode_scalars(a) -> list:
    """Nested list of JSON scalars; fractions become ``"p/q"`` strings."""
    arr = np.asarray(a)
    if arr.dtype == object:
        return np.vectorize(lambda v: f"{v.numerator}/{v.denominator}", otypes=[object])(
            arr
        ).tolist()
    if np.issubdtype(arr.dtype, np.integer):
        return arr.tolist()
    return arr.astype(float).tolist()


def decode_scalars(data, exact: bool) -> np.ndarray:
    arr = np.array(data, dtype=object)
    if exact:
        return np.vectorize(lambda v: Fraction(v), otypes=[object])(arr)
    return arr.astype(float)


def _contains_str(data) -> bool:
    if isinstance(data, list):
        return any(_contains_str(d) for d in data)
    return isinstance(data, str)


def space_to_json(space: FiniteProbSpace) -> dict:
    return {"mass": encode_scalars(space.mass)}


def space_from_json(d: dict) -> FiniteProbSpace:
    exact = _contains_str(d["mass"])
    return FiniteProbSpace(decode_scalars(d["mass"], exact))


def partition_to_json(p: Partition) -> dict:
    return {"block_of": p.block_of.tolist()}


def partition_from_json(d: dict) -> Partition:
    return Partition(np.asarray(d["block_of"], dtype=np.int64))


def variable_to_json(x: RandomVariable) -> dict:
    return {"values": encode_scalars(x.values)}


def variable_from_json(d: dict, space: FiniteProbSpace) -> RandomVariable:
    return RandomVariable(decode_scalars(d["values"], space.exact), space)


def filtration_to_json(f: Filtration) -> list:
    return [partition_to_json(p) for p in f.steps]


def filtration_from_json(d: Sequence) -> Filtration:
    return Filtration(tuple(partition_from_json(p) for p in d))


def pair_to_json(pair: ProductFiltrationPair) -> dict:
    return {
        "space1": space_to_json(pair.space1),
        "space2": space_to_json(pair.space2),
        "filt1": filtration_to_json(pair.filt1),
        "filt2": filtration_to_json(pair.filt2),
    }


def pair_from_json(d: dict) -> ProductFiltrationPair:
    return ProductFiltrationPair(
        space_from_json(d["space1"]),
        space_from_json(d["space2"]),
        filtration_from_json(d["filt1"]),
        filtration_from_json(d["filt2"]),
    )
