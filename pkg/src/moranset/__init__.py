"""Generalized Moran sets: construction trees, dimension bounds, rendering."""

from __future__ import annotations

__version__ = "0.1.0"

from .dimension import (
    BoundsReport,
    ConditionReport,
    bounds_limit,
    bounds_mean,
    bounds_theorem43,
    bounds_uniform,
    bounds_vector,
    check_prop21,
    check_prop22,
    moran_root,
    natural_measure,
    s_norm,
)
from .empirics import BoxDimEstimate, box_count, estimate_dimension
from .errors import DomainError, MoranError, ValidationError
from .families import CANTOR, MENGER, SIERPINSKI, RatioVector, get_family, ratio_vector, validate_disjoint
from .index import MultiIndex, generation_size, linear_index, sigma_of
from .markers import Constant, Formula, Random, marker_at, ratio_envelope
from .rng import counter_uniform
from .tree import GenerationTree, build_tree

__all__ = [
    "BoundsReport", "BoxDimEstimate", "CANTOR", "ConditionReport", "Constant", "DomainError",
    "Formula", "GenerationTree", "MENGER", "MoranError", "MultiIndex", "Random", "RatioVector",
    "SIERPINSKI", "ValidationError", "__version__", "bounds_limit", "bounds_mean", "bounds_theorem43",
    "bounds_uniform", "bounds_vector", "box_count", "build_tree", "check_prop21", "check_prop22",
    "counter_uniform", "estimate_dimension", "generation_size", "get_family", "linear_index",
    "marker_at", "moran_root", "natural_measure", "ratio_envelope", "ratio_vector", "s_norm",
    "sigma_of", "validate_disjoint",
]
