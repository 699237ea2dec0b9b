"""Complex conics with no real points and their SL(3,R) normal form.

A conic is the null locus of a complex symmetric form Q = Q1 + i Q2 on C^3,
defined up to a complex factor.  It misses every real point exactly when some
phase rotation of Q has positive definite real part; that rotation is also the
starting point of the normal form diag(e^{ip}, e^{iq}, e^{-ip}).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh
from scipy.optimize import minimize_scalar

from .errors import (DegenerateConic, DegenerateSpan, GeometryError, HasRealPoints,
                     NotSimultaneouslyDiagonalizable, TangentLine)
from .projmodel import SL3, SPAN_TOL, as_vec3

SYM_TOL = 1e-14
DEGENERACY_TOL = 1e-10
DEFINITE_TOL = 1e-10
PHASE_SAMPLES = 720
NORMAL_FORM_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class ConicQuadric:
    q_re: np.ndarray
    q_im: np.ndarray

    def __post_init__(self):
        re = np.asarray(self.q_re, dtype=float)
        im = np.asarray(self.q_im, dtype=float)
        if re.shape != (3, 3) or im.shape != (3, 3):
            raise GeometryError("conic matrices must be 3x3")
        scale = max(np.abs(re).max(), np.abs(im).max(), 1e-300)
        if np.abs(re - re.T).max() > SYM_TOL * scale or np.abs(im - im.T).max() > SYM_TOL * scale:
            raise GeometryError("conic matrices must be symmetric")
        re, im = (re + re.T) / 2, (im + im.T) / 2
        object.__setattr__(self, "q_re", re)
        object.__setattr__(self, "q_im", im)
        m = self.matrix / np.linalg.norm(self.matrix)
        if not np.isfinite(m).all() or abs(np.linalg.det(m)) <= DEGENERACY_TOL:
            raise DegenerateConic("the quadratic form is degenerate")

    @classmethod
    def from_complex(cls, m) -> "ConicQuadric":
        m = np.asarray(m, dtype=complex)
        return cls(m.real.copy(), m.imag.copy())

    @classmethod
    def normal_form(cls, p: float, q: float) -> "ConicQuadric":
        return cls.from_complex(np.diag(np.exp(1j * np.array([p, q, -p]))))

    @property
    def matrix(self) -> np.ndarray:
        return self.q_re + 1j * self.q_im

    def value(self, v, w=None) -> complex:
        """Bilinear form Q(v, w) (or Q(v, v))."""
        w = v if w is None else w
        return complex(np.asarray(v) @ self.matrix @ np.asarray(w))

    def congruent(self, g) -> "ConicQuadric":
        """The pulled-back form g^T Q g."""
        g = g.m if isinstance(g, SL3) else np.asarray(g, dtype=float)
        return ConicQuadric.from_complex(g.T @ self.matrix @ g)


@dataclass(frozen=True, eq=False)
class NormalizedConic:
    """Normal-form data for a conic.

    ``scale`` is the complex factor with ``frame.T @ (scale * Q) @ frame`` equal
    to ``diag(e^{ip}, e^{iq}, e^{-ip})``; ``matrix`` is ``scale * Q`` in the
    original coordinates.
    """

    p: float
    q: float
    frame: SL3
    scale: complex = 1.0
    source: ConicQuadric | None = field(default=None, repr=False)

    @classmethod
    def from_pq(cls, p: float, q: float) -> "NormalizedConic":
        if not abs(q) <= p < np.pi / 2:
            raise GeometryError("normal form needs |q| <= p < pi/2")
        return cls(float(p), float(q), SL3.identity(), 1.0, ConicQuadric.normal_form(p, q))

    @property
    def matrix(self) -> np.ndarray:
        src = self.source if self.source is not None else ConicQuadric.normal_form(self.p, self.q)
        return self.scale * src.matrix

    @property
    def diagonal(self) -> np.ndarray:
        return np.diag(np.exp(1j * np.array([self.p, self.q, -self.p])))

    def residual(self) -> float:
        """Distance of the pulled-back normalized form from the diagonal model."""
        g = self.frame.m
        return float(np.abs(g.T @ self.matrix @ g - self.diagonal).max())


def _normalized(Q: ConicQuadric) -> np.ndarray:
    m = Q.matrix
    return m / np.linalg.norm(m)


def _min_eig(m: np.ndarray, theta: float) -> float:
    return float(np.linalg.eigvalsh(np.cos(theta) * m.real - np.sin(theta) * m.imag)[0])


def best_phase(Q: ConicQuadric) -> tuple[float, float]:
    """Phase θ maximizing the least eigenvalue of Re(e^{iθ} Q) (Q at unit norm)."""
    m = _normalized(Q)
    grid = np.linspace(0, 2 * np.pi, PHASE_SAMPLES, endpoint=False)
    # vectorized sweep over all phases at once
    stack = np.cos(grid)[:, None, None] * m.real - np.sin(grid)[:, None, None] * m.imag
    vals = np.linalg.eigvalsh(stack)[:, 0]
    k = int(np.argmax(vals))
    step = grid[1] - grid[0]
    res = minimize_scalar(lambda t: -_min_eig(m, t), bounds=(grid[k] - step, grid[k] + step),
                          method="bounded", options={"xatol": 1e-13})
    theta, best = (res.x, -res.fun) if -res.fun >= vals[k] else (grid[k], vals[k])
    return float(np.mod(theta, 2 * np.pi)), float(best)


def has_real_points(Q: ConicQuadric) -> bool:
    return best_phase(Q)[1] <= DEFINITE_TOL


def normalize_conic(Q: ConicQuadric) -> NormalizedConic:
    theta, margin = best_phase(Q)
    if margin <= DEFINITE_TOL:
        raise HasRealPoints("no phase rotation of the form is positive definite")
    m = np.exp(1j * theta) * _normalized(Q)
    try:
        lam, vecs = eigh(m.imag, m.real)
    except np.linalg.LinAlgError as exc:
        raise NotSimultaneouslyDiagonalizable(str(exc)) from exc
    # vecs^T m vecs = diag(1 + i lam)
    args = np.arctan(lam)
    moduli = np.hypot(1.0, lam)
    order = np.lexsort((np.arange(3), moduli, -args))
    args, moduli, vecs = args[order], moduli[order], vecs[:, order]
    mid = (args[0] + args[2]) / 2
    p, q = (args[0] - args[2]) / 2, args[1] - mid
    frame = vecs / np.sqrt(moduli)
    if np.linalg.det(frame) < 0:
        frame[:, 0] *= -1
    frame = frame / np.cbrt(np.linalg.det(frame))
    frame_sl3 = SL3(frame)

    pulled = frame.T @ Q.matrix @ frame
    target = np.diag(np.exp(1j * np.array([p, q, -p])))
    scale = complex(np.vdot(pulled, target) / np.vdot(pulled, pulled))
    nc = NormalizedConic(float(p), float(q), frame_sl3, scale, Q)
    if nc.residual() > NORMAL_FORM_TOL:
        raise NotSimultaneouslyDiagonalizable(f"normal form residual {nc.residual():.3g}")
    return nc


class RootPair(tuple):
    """The two roots of Q(v + t w) = 0, the one with positive imaginary part first.

    ``near_infinity`` is set when Q(w, w) is too small to divide by; the pair then
    holds the roots s of the reversed polynomial Q(w + s v) = 0.
    """

    near_infinity: bool

    def __new__(cls, t1: complex, t2: complex, near_infinity: bool = False):
        obj = super().__new__(cls, (t1, t2))
        obj.near_infinity = near_infinity
        return obj


def _quadratic_roots(a: complex, b: complex, c: complex) -> tuple[complex, complex]:
    """Roots of a t^2 + 2 b t + c, computed without cancellation."""
    disc = np.sqrt(complex(b * b - a * c))
    if (b.conjugate() * disc).real < 0:
        disc = -disc
    s = -(b + disc)
    return s / a, c / s


def _check_span(v, w):
    if np.linalg.norm(np.cross(v, w)) < SPAN_TOL * np.linalg.norm(v) * np.linalg.norm(w) or not np.cross(v, w).any():
        raise DegenerateSpan("v and w are linearly dependent")


def line_conic_intersect(Q, v, w) -> RootPair:
    m = Q.matrix
    v, w = as_vec3(v), as_vec3(w)
    _check_span(v, w)
    qvv, qvw, qww = complex(v @ m @ v), complex(v @ m @ w), complex(w @ m @ w)
    size = np.linalg.norm(m) * np.linalg.norm(w) ** 2
    near_inf = abs(qww) < 1e-12 * size
    t1, t2 = _quadratic_roots(qvv, qvw, qww) if near_inf else _quadratic_roots(qww, qvw, qvv)
    if abs(t1 - t2) < 1e-10:
        raise TangentLine("the line is tangent to the conic")
    if t1.imag < t2.imag:
        t1, t2 = t2, t1
    return RootPair(complex(t1), complex(t2), bool(near_inf))


def unit_speed_basis(Q, v, w) -> tuple[float, float]:
    """Coefficients (a2, b2) with [(1 + i a2) v + i b2 w] on the conic, b2 > 0."""
    roots = line_conic_intersect(Q, v, w)
    t = roots[0] if not roots.near_infinity else 1 / roots[1]
    if t.imag <= 0:
        raise TangentLine("no root in the upper half plane")
    return t.real / t.imag, abs(t) ** 2 / t.imag


@dataclass(frozen=True)
class StabilizerReport:
    case: str
    generators: int
    max_residual: float


def stabilizer_check(nc: NormalizedConic, samples: int = 16, seed: int = 0) -> StabilizerReport:
    d = nc.diagonal
    rng = np.random.default_rng(seed)
    if abs(nc.p) < 1e-12 and abs(nc.q) < 1e-12:
        case = "rotations"
        gens = []
        for _ in range(samples):
            qmat, r = np.linalg.qr(rng.standard_normal((3, 3)))
            qmat = qmat * np.sign(np.diag(r))
            if np.linalg.det(qmat) < 0:
                qmat[:, 0] *= -1
            gens.append(qmat)
    elif abs(abs(nc.q) - nc.p) < 1e-12:
        case = "circle"
        i, j = (0, 1) if nc.q > 0 else (1, 2)
        gens = []
        for ang in np.linspace(0, 2 * np.pi, samples, endpoint=False):
            g = np.eye(3)
            g[i, i] = g[j, j] = np.cos(ang)
            g[i, j], g[j, i] = -np.sin(ang), np.sin(ang)
            gens.append(g)
    else:
        case = "sign flips"
        gens = [np.diag(s) for s in ([1, 1, 1], [-1, -1, 1], [-1, 1, -1], [1, -1, -1])]
    res = max(float(np.abs(g.T @ d @ g - d).max()) for g in gens)
    return StabilizerReport(case, len(gens), res)
