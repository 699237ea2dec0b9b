"""The flat projective model: rays in R^3, oriented lines, tangent classes and SL(3,R).

Vectors are plain ``numpy`` arrays of shape (3,).  The projective objects carry
a canonical representative built from the Euclidean structure of R^3; that
structure is only used to pick representatives, never for geometry.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSpan, GeometryError, ZeroVector

SPAN_TOL = 1e-12
DET_TOL = 1e-12


def as_vec3(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (3,) or not np.all(np.isfinite(v)):
        raise GeometryError(f"expected a finite 3-vector, got {v!r}")
    return v


@dataclass(frozen=True, eq=False)
class RayPoint:
    """An oriented line through the origin, i.e. a point of the sphere of rays."""

    rep: np.ndarray

    def __eq__(self, other):
        return isinstance(other, RayPoint) and np.array_equal(self.rep, other.rep)

    def __hash__(self):
        return hash(self.rep.tobytes())


@dataclass(frozen=True, eq=False)
class OrientedLine:
    """An oriented 2-plane E of R^3, identified by its covector ray."""

    plane: tuple[np.ndarray, np.ndarray]
    covector: RayPoint

    def __eq__(self, other):
        return isinstance(other, OrientedLine) and self.covector == other.covector

    def __hash__(self):
        return hash(self.covector)

    def incidence(self, x) -> float:
        return float(self.covector.rep @ as_vec3(x))


@dataclass(frozen=True, eq=False)
class TangentVec:
    """The class [v, w] of a tangent vector at the ray [v]."""

    base: np.ndarray
    dir: np.ndarray

    def __eq__(self, other):
        return (isinstance(other, TangentVec) and np.array_equal(self.base, other.base)
                and np.array_equal(self.dir, other.dir))

    def __hash__(self):
        return hash((self.base.tobytes(), self.dir.tobytes()))

    def scaled(self, c: float) -> "TangentVec":
        if c < 0:
            raise ValueError("tangent classes only scale by c >= 0")
        return TangentVec(self.base, c * self.dir)


@dataclass(frozen=True, eq=False)
class SL3:
    m: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.m, dtype=float)
        if m.shape != (3, 3):
            raise GeometryError("SL3 needs a 3x3 matrix")
        if abs(np.linalg.det(m) - 1.0) > DET_TOL:
            raise GeometryError(f"det = {np.linalg.det(m)!r} is not 1")
        object.__setattr__(self, "m", m)

    @classmethod
    def from_matrix(cls, m) -> "SL3":
        """Rescale any matrix with positive determinant onto det = 1."""
        return cls(renormalize(m))

    @classmethod
    def identity(cls) -> "SL3":
        return cls(np.eye(3))

    def __matmul__(self, other: "SL3") -> "SL3":
        return SL3(renormalize(self.m @ other.m))

    def inverse(self) -> "SL3":
        return SL3(renormalize(np.linalg.inv(self.m)))


def renormalize(m) -> np.ndarray:
    """Scalar multiple of ``m`` with determinant exactly representable as 1 (to rounding)."""
    m = np.asarray(m, dtype=float)
    d = np.linalg.det(m)
    if d <= 0:
        raise GeometryError("matrix must have positive determinant")
    return m / np.cbrt(d)


def random_sl3(rng: np.random.Generator, spread: float = 1.0) -> SL3:
    while True:
        m = np.eye(3) + spread * rng.standard_normal((3, 3))
        d = np.linalg.det(m)
        if abs(d) > 1e-2:
            if d < 0:
                m[:, 0] *= -1
            return SL3.from_matrix(m)


def ray_normalize(v) -> RayPoint:
    v = as_vec3(v)
    n = np.linalg.norm(v)
    if n == 0:
        raise ZeroVector("cannot take the ray of the zero vector")
    return RayPoint(v / n)


def tangent_canonical(v, w) -> TangentVec:
    v, w = as_vec3(v), as_vec3(w)
    n2 = float(v @ v)
    if n2 == 0:
        raise ZeroVector("tangent class needs a nonzero base")
    n = np.sqrt(n2)
    dir_ = (w - (w @ v) / n2 * v) / n
    return TangentVec(v / n, dir_)


def line_through(v0, v1) -> OrientedLine:
    v0, v1 = as_vec3(v0), as_vec3(v1)
    normal = np.cross(v0, v1)
    if np.linalg.norm(normal) < SPAN_TOL * np.linalg.norm(v0) * np.linalg.norm(v1) or not normal.any():
        raise DegenerateSpan("the two vectors do not span a plane")
    return OrientedLine((v0, v1), ray_normalize(normal))


def sl3_act(g: SL3, p):
    """Act by g: points by g x, covectors by xi g^-1, tangent classes by the derivative."""
    if isinstance(p, RayPoint):
        return ray_normalize(g.m @ p.rep)
    if isinstance(p, OrientedLine):
        v0, v1 = (g.m @ u for u in p.plane)
        xi = np.linalg.solve(g.m.T, p.covector.rep)
        return OrientedLine((v0, v1), ray_normalize(xi))
    if isinstance(p, TangentVec):
        return tangent_canonical(g.m @ p.base, g.m @ p.dir)
    raise TypeError(f"cannot act on {type(p).__name__}")
