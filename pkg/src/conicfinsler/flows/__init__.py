"""Geodesics, Jacobi fields, Crofton sampling and the leaf system."""

from .crofton import crofton_check, small_circle, wobbly_curve
from .geodesics import geodesic_line, resample_geodesic, spray_integrate
from .jacobi import jacobi_conjugate, jacobi_trace
from .leaf import ControlPath, LeafState, cross_validate, holonomy_defect, leaf_integrate

__all__ = [
    "crofton_check", "small_circle", "wobbly_curve",
    "geodesic_line", "resample_geodesic", "spray_integrate",
    "jacobi_conjugate", "jacobi_trace",
    "ControlPath", "LeafState", "cross_validate", "holonomy_defect", "leaf_integrate",
]
