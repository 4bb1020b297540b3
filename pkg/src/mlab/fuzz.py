"""Random product-filtration instances with reproducible per-trial seeds."""
from __future__ import annotations

import numpy as np

from .probspace import (
    EXACT_MAX_OUTCOMES,
    FiniteProbSpace,
    Filtration,
    Partition,
    ProbabilityError,
    ProductFiltrationPair,
    RandomVariable,
    decode_scalars,
    encode_scalars,
    pair_from_json,
    pair_to_json,
    to_fraction_array,
)
from .transform import DiscreteProcess, MartingaleInputs


def trial_rng(master: int, index: int) -> np.random.Generator:
    """Independent stream for trial ``index`` of a run seeded with ``master``."""
    return np.random.default_rng(np.random.SeedSequence([int(master), int(index)]))


def random_filtration(size: int, horizon: int, rng: np.random.Generator,
                      split_prob: float = 0.6, binary: bool = False) -> Filtration:
    """Refining partitions of ``0..size-1`` starting from the trivial one.

    Each step splits every block of size > 1 with probability ``split_prob``,
    into two pieces when ``binary`` and otherwise into two or three.
    """
    labels = np.zeros(size, dtype=np.int64)
    steps = [Partition(labels)]
    for _ in range(horizon):
        new = labels.copy()
        nxt = int(labels.max()) + 1
        for b in np.unique(labels):
            members = np.flatnonzero(labels == b)
            if members.size < 2 or rng.random() >= split_prob:
                continue
            pieces = 2 if binary or members.size < 3 else int(rng.integers(2, 4))
            perm = rng.permutation(members)
            cuts = np.sort(rng.choice(np.arange(1, members.size), pieces - 1, replace=False))
            for part in np.split(perm, cuts)[1:]:
                new[part] = nxt
                nxt += 1
        labels = new
        steps.append(Partition(labels))
    return Filtration(tuple(steps))


def dyadic_filtration(depth: int) -> Filtration:
    """Dyadic intervals on ``2^depth`` points, steps ``0..depth``."""
    size = 2**depth
    return Filtration(
        tuple(Partition(np.arange(size) >> (depth - k)) for k in range(depth + 1))
    )


def random_space(size: int, rng: np.random.Generator, exact: bool = False,
                 uniform: bool = False) -> FiniteProbSpace:
    if uniform:
        return FiniteProbSpace.uniform(size, exact=exact)
    if exact:
        return FiniteProbSpace.from_weights(rng.integers(1, 6, size=size), exact=True)
    return FiniteProbSpace.from_weights(rng.uniform(0.2, 1.0, size=size))


def random_pair(dims: tuple[int, int], horizon: int, rng: np.random.Generator,
                exact: bool = False, uniform: bool = False, split_prob: float = 0.6,
                binary: bool = False) -> ProductFiltrationPair:
    n1, n2 = dims
    if exact and n1 * n2 > EXACT_MAX_OUTCOMES:
        raise ProbabilityError(f"exact mode is limited to {EXACT_MAX_OUTCOMES} outcomes")
    return ProductFiltrationPair(
        random_space(n1, rng, exact, uniform),
        random_space(n2, rng, exact, uniform),
        random_filtration(n1, horizon, rng, split_prob, binary),
        random_filtration(n2, horizon, rng, split_prob, binary),
    )


def random_values(shape, rng: np.random.Generator, exact: bool = False,
                  heavy: bool = False) -> np.ndarray:
    """Small integers (exact) or Gaussian floats; ``heavy`` adds a few spikes."""
    if exact:
        return to_fraction_array(rng.integers(-3, 4, size=shape))
    v = rng.standard_normal(shape)
    if heavy:
        v = v * np.where(rng.random(shape) < 0.1, rng.uniform(2, 6, size=shape), 1.0)
    return v


def random_K(pair: ProductFiltrationPair, rng: np.random.Generator) -> DiscreteProcess:
    """``H_k``-measurable multipliers with values in ``[-1, 1]`` (``{-1, 0, 1}`` exact)."""
    arrays = []
    for k in range(pair.horizon + 1):
        h = pair.H(k)
        if pair.exact:
            per_block = to_fraction_array(rng.integers(-1, 2, size=h.block_count))
        else:
            per_block = rng.uniform(-1, 1, size=h.block_count)
        arrays.append(per_block[h.block_of].reshape(pair.shape))
    return DiscreteProcess.from_arrays(arrays, pair.space)


def random_inputs(rng: np.random.Generator, dims=(3, 3), horizon: int = 3, exact: bool = False,
                  with_K: bool = False, uniform: bool = False, heavy: bool = False,
                  binary: bool = False) -> MartingaleInputs:
    pair = random_pair(dims, horizon, rng, exact=exact, uniform=uniform, binary=binary)
    X = random_values(pair.shape, rng, exact, heavy)
    Y = random_values(pair.shape, rng, exact, heavy)
    Z = random_values(pair.shape, rng, exact, heavy)
    K = random_K(pair, rng) if with_K else None
    return MartingaleInputs(pair, X, Y, Z, K)


def random_dims(rng: np.random.Generator, max_side: int = 6, min_side: int = 1) -> tuple[int, int]:
    return int(rng.integers(min_side, max_side + 1)), int(rng.integers(min_side, max_side + 1))


def normalized(inputs: MartingaleInputs) -> MartingaleInputs:
    """Rescale ``X, Y, Z`` to unit ``L^2`` norm (zero variables are left alone)."""
    if inputs.exact:
        return inputs
    out = {}
    mass = inputs.space.mass
    for name in ("X", "Y", "Z"):
        v = getattr(inputs, name).values
        s = float(np.sqrt((mass * v * v).sum()))
        out[name] = v / s if s > 0 else v
    return inputs.with_values(**out)


# --------------------------------------------------------------------------
# instance serialization (failure artifacts and replay)
# --------------------------------------------------------------------------


def inputs_to_json(inputs: MartingaleInputs) -> dict:
    return {
        "pair": pair_to_json(inputs.pair),
        "X": {"values": encode_scalars(inputs.X.values)},
        "Y": {"values": encode_scalars(inputs.Y.values)},
        "Z": {"values": encode_scalars(inputs.Z.values)},
        "K": [{"values": encode_scalars(inputs.K[k])} for k in range(len(inputs.K))],
    }


def inputs_from_json(d: dict) -> MartingaleInputs:
    pair = pair_from_json(d["pair"])
    sp = pair.space

    def rv(entry):
        return RandomVariable(decode_scalars(entry["values"], pair.exact), sp)

    K = DiscreteProcess(tuple(rv(e) for e in d["K"])) if d.get("K") else None
    return MartingaleInputs(pair, rv(d["X"]), rv(d["Y"]), rv(d["Z"]), K)


__all__ = [
    "dyadic_filtration",
    "inputs_from_json",
    "inputs_to_json",
    "normalized",
    "random_K",
    "random_dims",
    "random_filtration",
    "random_inputs",
    "random_pair",
    "random_space",
    "random_values",
    "trial_rng",
]
