"""Projectively flat Finsler metrics of curvature 1 on the sphere, built from complex conics."""

from .conics import ConicQuadric, NormalizedConic, line_conic_intersect, normalize_conic, unit_speed_basis
from .errors import GeometryError
from .finsler import FinslerNorm, PerturbedNorm, indicatrix_sample, quartic_fit, root_oracle
from .projmodel import SL3, OrientedLine, RayPoint, TangentVec, ray_normalize, tangent_canonical

__version__ = "0.1.0"

__all__ = [
    "ConicQuadric", "NormalizedConic", "normalize_conic", "line_conic_intersect", "unit_speed_basis",
    "GeometryError", "FinslerNorm", "PerturbedNorm", "indicatrix_sample", "quartic_fit", "root_oracle",
    "SL3", "RayPoint", "OrientedLine", "TangentVec", "ray_normalize", "tangent_canonical",
]
