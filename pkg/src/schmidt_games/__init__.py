"""Workbench for Schmidt games on parameter spaces.

Play constructive winning strategies against adversarial opponents over
concrete resonant families, emit machine-checkable badness certificates for
the outcome, and estimate Hausdorff-dimension lower bounds from survivor
trees.
"""

from .exactnum import Exact, LogVal
from .geometry import (
    AmbientSupport,
    Box,
    Cylinder,
    FormalBall,
    ObstacleDescriptor,
    Point,
    PsiSpec,
    Slab,
    Tri,
    WordPoint,
    cantor_support,
    contains,
    disjoint,
    euclidean_support,
    neighborhood,
    product_support,
    psi_eval,
    shift_spec,
    shift_support,
    standard_spec,
    weighted_spec,
)

__all__ = [
    "Exact", "LogVal",
    "AmbientSupport", "Box", "Cylinder", "FormalBall", "ObstacleDescriptor",
    "Point", "PsiSpec", "Slab", "Tri", "WordPoint",
    "cantor_support", "contains", "disjoint", "euclidean_support",
    "neighborhood", "product_support", "psi_eval", "shift_spec",
    "shift_support", "standard_spec", "weighted_spec",
]

__version__ = "0.1.0"
