"""
Configuration space: data types, matching distances, transport and the
parallel-extension operator on the glued window.
"""

from .configspace import Configuration, EmpiricalLaw, Window, WeylPoint, count, from_points, restrict
from .matching import (
    INFINITE,
    ExtendedDistance,
    MatchPlan,
    brute_force_partial,
    glued_distance,
    interpolate,
    matching_distance,
    partial_matching_distance,
)
from .transport import Ground, TransportPlan, displacement, optimal_plan, wasserstein

__all__ = [
    "Configuration",
    "EmpiricalLaw",
    "Window",
    "WeylPoint",
    "count",
    "from_points",
    "restrict",
    "INFINITE",
    "ExtendedDistance",
    "MatchPlan",
    "brute_force_partial",
    "glued_distance",
    "interpolate",
    "matching_distance",
    "partial_matching_distance",
    "Ground",
    "TransportPlan",
    "displacement",
    "optimal_plan",
    "wasserstein",
]
