"""Compiled versus numpy fiber kernels.

Usage: python3 benchmarks/bench_kernels.py [--sizes 4,8,16,24] [--repeat 5]

Prints the best-of-``repeat`` time per call for each backend and the max
absolute difference between their outputs.
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from mlab import _pykernels
from mlab.fuzz import random_filtration
from mlab.probspace import FiniteProbSpace, averaging_matrix

try:
    from mlab import _ckernels
except ImportError:
    _ckernels = None


def operands(size: int, rng: np.random.Generator):
    sp = FiniteProbSpace.from_weights(rng.uniform(0.2, 1.0, size))
    filt = random_filtration(size, 3, rng, split_prob=0.8)
    m0 = averaging_matrix(filt[1], sp.mass)
    m1 = averaging_matrix(filt[2], sp.mass)
    x, y, z = (rng.standard_normal((size, size)) for _ in range(3))
    return m0, m1 - m0, m1, x, y, z


def cases(ops):
    ma, da, mb1, x, y, z = ops
    return {
        "mixed_square": (ma, ma, x, z),
        "quartic_fiber": (ma, da, ma, mb1, x, z),
        "alpha_fiber": (ma, ma, da, x, y, z),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="4,8,16,24")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _ckernels is None:
        print("compiled kernels not built; only the numpy backend is available")
    rng = np.random.default_rng(0)
    print(f"{'kernel':14s} {'N':>4s} {'numpy [ms]':>11s} {'cython [ms]':>12s} {'speedup':>8s} {'max diff':>10s}")
    for size in (int(s) for s in args.sizes.split(",")):
        for name, ops in cases(operands(size, rng)).items():
            py = getattr(_pykernels, name)
            number = max(1, int(2000 / size**2))
            t_py = min(timeit.repeat(lambda: py(*ops), number=number, repeat=args.repeat)) / number
            if _ckernels is None:
                print(f"{name:14s} {size:4d} {t_py * 1e3:11.3f} {'-':>12s} {'-':>8s} {'-':>10s}")
                continue
            cy = getattr(_ckernels, name)
            t_cy = min(timeit.repeat(lambda: cy(*ops), number=number, repeat=args.repeat)) / number
            diff = float(np.max(np.abs(np.asarray(py(*ops)) - np.asarray(cy(*ops)))))
            print(f"{name:14s} {size:4d} {t_py * 1e3:11.3f} {t_cy * 1e3:12.3f} "
                  f"{t_py / t_cy:8.1f} {diff:10.1e}")


if __name__ == "__main__":
    main()
