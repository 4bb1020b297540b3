"""Verification workbench for modified martingale transforms on finite product filtrations."""
from .kernels import BACKEND
from .probspace import (
    DimensionMismatch,
    FiniteProbSpace,
    Filtration,
    Partition,
    ProbabilityError,
    ProductFiltrationPair,
    RandomVariable,
    cond_exp,
    sigma_intersect,
)
from .transform import DiscreteProcess, MartingaleInputs, dot_transform

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "DimensionMismatch",
    "DiscreteProcess",
    "FiniteProbSpace",
    "Filtration",
    "MartingaleInputs",
    "Partition",
    "ProbabilityError",
    "ProductFiltrationPair",
    "RandomVariable",
    "cond_exp",
    "dot_transform",
    "sigma_intersect",
]
