"""Imputation methods registered with the ComponentFactory on import."""

from .closest_observation import ClosestObservationImputer
from .last_observation import LastObservationImputer
from .linear_interpolation import LinearInterpolationImputer
from .model_imputer import ModelImputer
from .temporal_fill import fill_gaps, find_neighbours

BASELINE_METHODS = ("last", "closest", "linear")

__all__ = [
    "ClosestObservationImputer",
    "LastObservationImputer",
    "LinearInterpolationImputer",
    "ModelImputer",
    "fill_gaps",
    "find_neighbours",
    "BASELINE_METHODS",
]
