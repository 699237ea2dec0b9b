"""The Finsler norm attached to a conic without real points, and its indicatrix.

For the normalized form Q, write ``v.w`` for its complex bilinear extension.
The norm of the tangent vector [v, w] is

    F(v, w) = Re[(sqrt((w.w)(v.v) - (v.w)^2) - i (v.w)) / (v.v)]

with the principal square root.  Every evaluator here accepts batched arrays
with a trailing axis of length 3 and, for derivative work, :class:`~.jets.Jet`
arguments of the same shape.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jets as J
from .conics import ConicQuadric, NormalizedConic, normalize_conic
from .errors import BranchViolation, InsufficientSamples, ZeroBase, ZeroNorm
from .projmodel import RayPoint, as_vec3

BRANCH_TOL = 1e-10
ZERO_NORM_TOL = 1e-14


def _vdot(m: np.ndarray, a, b):
    return J.dot(J.matvec(m, a), b)


class FinslerNorm:
    """Evaluator of the conic norm, including its fiber gradient."""

    def __init__(self, conic: NormalizedConic):
        self.conic = conic
        self.matrix = np.asarray(conic.matrix, dtype=complex)
        # (w.w)(v.v) - (v.w)^2 = adj(Q)(v x w, v x w); the right side vanishes
        # exactly on the zero tangent class instead of by cancellation
        self.adjugate = np.linalg.det(self.matrix) * np.linalg.inv(self.matrix)

    @classmethod
    def from_pq(cls, p: float, q: float) -> "FinslerNorm":
        return cls(NormalizedConic.from_pq(p, q))

    @classmethod
    def from_quadric(cls, Q: ConicQuadric) -> "FinslerNorm":
        return cls(normalize_conic(Q))

    def __repr__(self):
        return f"FinslerNorm(p={self.conic.p:.6g}, q={self.conic.q:.6g})"

    def dot(self, a, b):
        return _vdot(self.matrix, a, b)

    def _parts(self, v, w):
        A, B = self.dot(v, v), self.dot(v, w)
        n = J.cross(v, w)
        D = _vdot(self.adjugate, n, n)
        a0 = np.abs(J.value(A))
        if np.any(a0 == 0):
            raise ZeroBase("the base vector must be nonzero")
        self._check_branch(v, w, J.value(D))
        return A, B, D

    def _check_branch(self, v, w, d0):
        d0 = np.asarray(d0)
        near_cut = (d0.real < 0) & (np.abs(d0.imag) <= BRANCH_TOL * np.abs(d0))
        if np.any(near_cut):
            v0, w0 = np.asarray(J.value(v)), np.asarray(J.value(w))
            wedge = np.linalg.norm(np.cross(v0, w0), axis=-1)
            scale = np.linalg.norm(v0, axis=-1) * np.linalg.norm(w0, axis=-1)
            if np.any(near_cut & (wedge > 1e-12 * scale)):
                raise BranchViolation("radicand reached the square-root cut")

    def value(self, v, w):
        A, B, D = self._parts(v, w)
        return J.real((J.sqrt(D) - 1j * B) / A)

    __call__ = value

    def grad_w(self, v, w):
        """Gradient of F in the fiber variable w (trailing axis of length 3)."""
        A, B, D = self._parts(v, w)
        mv, mw = J.matvec(self.matrix, v), J.matvec(self.matrix, w)
        e = J.expand_dims
        root = J.sqrt(D)
        g = ((e(A) * mw - e(B) * mv) / e(root) - 1j * mv) / e(A)
        return J.real(g)


class PerturbedNorm(FinslerNorm):
    """F + eps * h(n) * (k.w_perp)^m / |w_perp|^(m-1), a bump deformation of the norm.

    Here n = v/|v|, w_perp is the part of w/|v| orthogonal to n and h is a
    Gaussian bump on the sphere centred at ``center``.  The added term is
    invariant under w -> w + b v and positively homogeneous, so the result is
    again a Finsler norm for small eps.  With the default m = 3 the term is
    odd in w and changes the main scalar at first order (m = 2 would be a
    Riemannian change to first order).  Used to check that the flatness
    residuals detect a deformation.
    """

    def __init__(self, base: FinslerNorm, eps: float, center=(0.3, 0.2, 1.0),
                 width: float = 0.5, direction=(1.0, 0.3, -0.2), power: int = 3):
        super().__init__(base.conic)
        self.base = base
        self.eps = float(eps)
        self.center = as_vec3(center) / np.linalg.norm(center)
        self.width = float(width)
        self.direction = as_vec3(direction)
        self.power = int(power)

    def _geometry(self, v, w):
        e = J.expand_dims
        vlen = J.sqrt(J.dot(v, v))
        n = v / e(vlen)
        w_perp = (w - e(J.dot(w, n)) * n) / e(vlen)
        diff = n - self.center
        bump = J.exp(J.dot(diff, diff) * (-1.0 / self.width ** 2))
        k_perp = self.direction - e(J.dot(n, self.direction)) * n
        r = J.sqrt(J.dot(w_perp, w_perp))
        s = J.dot(k_perp, w_perp)
        return vlen, w_perp, k_perp, bump, r, s

    def value(self, v, w):
        _, _, _, bump, r, s = self._geometry(v, w)
        m = self.power
        return self.base.value(v, w) + self.eps * bump * s ** m / r ** (m - 1)

    __call__ = value

    def grad_w(self, v, w):
        e = J.expand_dims
        vlen, w_perp, k_perp, bump, r, s = self._geometry(v, w)
        m = self.power
        ratio = s / r
        extra = (e(m * ratio ** (m - 1)) * k_perp - e((m - 1) * ratio ** m / r) * w_perp) / e(vlen)
        return self.base.grad_w(v, w) + e(self.eps * bump) * extra


def finsler_norm(N: FinslerNorm, v, w) -> float:
    v, w = as_vec3(v), as_vec3(w)
    if not v.any():
        raise ZeroBase("the base vector must be nonzero")
    return float(N.value(v, w))


def root_oracle(N: FinslerNorm, v, w) -> np.ndarray:
    """Independent evaluation: Im t / |t|^2 for the root of Q(v + t w) = 0 with Im t > 0.

    Batched over leading axes; does not share code with the closed form.
    """
    m = N.matrix
    v, w = np.asarray(v, dtype=float), np.asarray(w, dtype=float)
    a = np.einsum("...i,ij,...j->...", w, m, w)
    b = np.einsum("...i,ij,...j->...", v, m, w)
    c = np.einsum("...i,ij,...j->...", v, m, v)
    disc = np.sqrt(b * b - a * c)
    disc = np.where((np.conj(b) * disc).real < 0, -disc, disc)
    s = -(b + disc)
    t1, t2 = s / a, c / s
    t = np.where(t1.imag > 0, t1, t2)
    return t.imag / np.abs(t) ** 2


def asymmetry_defect(N: FinslerNorm, v, w) -> float:
    return finsler_norm(N, v, w) - finsler_norm(N, v, -np.asarray(w, dtype=float))


def asymmetry_identity(N: FinslerNorm, v, w) -> float:
    """Right-hand side 2 Im[(v.w)/(v.v)] of the asymmetry identity."""
    v, w = as_vec3(v), as_vec3(w)
    return float(2 * (N.dot(v, w) / N.dot(v, v)).imag)


def tangent_plane_basis(base) -> tuple[np.ndarray, np.ndarray]:
    """A fixed orthonormal basis of the Euclidean complement of ``base``."""
    n = (base.rep if isinstance(base, RayPoint) else as_vec3(base))
    n = n / np.linalg.norm(n)
    helper = np.eye(3)[int(np.argmin(np.abs(n)))]
    e1 = np.cross(n, helper)
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(n, e1)


@dataclass(frozen=True, eq=False)
class IndicatrixCurve:
    base: RayPoint
    basis: tuple[np.ndarray, np.ndarray]
    theta: np.ndarray
    samples: np.ndarray  # (n, 3) directions w_k with F(base, w_k) = 1
    coords: np.ndarray  # (n, 2) coordinates of w_k in ``basis``

    def __len__(self):
        return len(self.theta)


def indicatrix_sample(N: FinslerNorm, base: RayPoint, n: int) -> IndicatrixCurve:
    if n < 16:
        raise InsufficientSamples("need at least 16 indicatrix samples")
    e1, e2 = tangent_plane_basis(base)
    theta = 2 * np.pi * np.arange(n) / n
    unit = np.cos(theta)[:, None] * e1 + np.sin(theta)[:, None] * e2
    v = np.broadcast_to(base.rep, unit.shape)
    f = N.value(v, unit)
    if np.any(f < ZERO_NORM_TOL):
        raise ZeroNorm("norm vanished on a nonzero tangent vector")
    radius = 1.0 / f
    coords = np.stack([np.cos(theta) * radius, np.sin(theta) * radius], axis=1)
    return IndicatrixCurve(base, (e1, e2), theta, unit * radius[:, None], coords)


def _monomials(x: np.ndarray, y: np.ndarray, degree: int) -> np.ndarray:
    cols = [x ** (d - j) * y ** j for d in range(degree + 1) for j in range(d + 1)]
    return np.stack(cols, axis=1)


def quartic_fit(curve: IndicatrixCurve) -> tuple[float, float]:
    """Algebraic fit residuals (degree <= 4, degree <= 2) of the indicatrix.

    The residual is the least singular value of the design matrix, with rows
    scaled by the norm of their degree-4 monomial vector and the whole divided
    by sqrt(n); the degree-2 design is a column subset, so its residual is
    never smaller.
    """
    if len(curve) < 64:
        raise InsufficientSamples("need at least 64 samples for the fit")
    x, y = curve.coords[:, 0], curve.coords[:, 1]
    full = _monomials(x, y, 4)
    rows = np.linalg.norm(full, axis=1, keepdims=True)
    full = full / rows
    sq = np.sqrt(len(x))
    deg4 = np.linalg.svd(full, compute_uv=False)[-1] / sq
    deg2 = np.linalg.svd(full[:, :6], compute_uv=False)[-1] / sq
    return float(deg4), float(deg2)


def random_tangent_pairs(rng: np.random.Generator, n: int) -> tuple[np.ndarray, np.ndarray]:
    v = rng.standard_normal((n, 3))
    w = rng.standard_normal((n, 3))
    return v, w


def antipodal_check(N: FinslerNorm, trials: int, seed: int = 0) -> float:
    v, w = random_tangent_pairs(np.random.default_rng(seed), trials)
    return float(np.abs(N.value(v, w) - N.value(-v, -w)).max())


def transform_check(N: FinslerNorm, g, trials: int, seed: int = 0) -> float:
    """max |F(gv, gw) - F(v, w)| for a linear map g (a stabilizer element on normal forms)."""
    g = np.asarray(g, dtype=float)
    v, w = random_tangent_pairs(np.random.default_rng(seed), trials)
    return float(np.abs(N.value(v @ g.T, w @ g.T) - N.value(v, w)).max())


def positivity_constant(N: FinslerNorm, trials: int, seed: int = 0) -> float:
    """Smallest observed F(v, w) |v|^2 / |v ^ w|, a uniform positivity margin."""
    v, w = random_tangent_pairs(np.random.default_rng(seed), trials)
    wedge = np.linalg.norm(np.cross(v, w), axis=1)
    return float(np.min(N.value(v, w) * np.einsum("ij,ij->i", v, v) / wedge))
