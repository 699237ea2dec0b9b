"""The rank-3 Frobenius system on SL(3,R) x R x C x C and its leaves.

A state (g, T, a, b) moves along a frame direction u1 X1 + u2 X2 + u3 X3 by
g' = g phi(u) together with the reduced structure equations for T, a and b.
Integral manifolds through conic-built structures reproduce (T, a, b) along
geodesics, which :func:`cross_validate` checks against the chart pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import StepTooLarge
from ..finsler import FinslerNorm
from ..coframe.charts import SigmaPoint, sigma_from_vectors
from ..coframe.invariants import conserved_W, conserved_w, invariants_at, invariants_batch, phi_matrix
from ..projmodel import renormalize
from .geodesics import resample_geodesic

STEP_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class LeafState:
    g: np.ndarray
    T: float
    a: complex
    b: complex

    def vector(self) -> np.ndarray:
        return np.concatenate([self.g.ravel(), [self.T, self.a.real, self.a.imag,
                                                self.b.real, self.b.imag]])

    @classmethod
    def from_vector(cls, y: np.ndarray) -> "LeafState":
        return cls(y[:9].reshape(3, 3), float(y[9]), complex(y[10], y[11]), complex(y[12], y[13]))

    @property
    def W(self) -> float:
        return float(conserved_W(self.T, self.a, self.b))

    @property
    def w(self) -> complex:
        return complex(conserved_w(self.T, self.a, self.b))

    @property
    def IJ(self) -> tuple[float, float]:
        z = -(self.T + 1j) * self.a
        return z.real, z.imag


@dataclass(frozen=True)
class ControlPath:
    """Piecewise-constant controls: each segment is ((u1, u2, u3), duration)."""

    segments: tuple

    def __post_init__(self):
        for u, dur in self.segments:
            if not (np.isfinite(dur) and dur > 0) or len(u) != 3:
                raise ValueError("segments need three controls and a positive duration")

    @classmethod
    def single(cls, u, duration: float) -> "ControlPath":
        return cls(((tuple(u), float(duration)),))


def connection_value(state: LeafState, u) -> np.ndarray:
    """phi(u1 X1 + u2 X2 + u3 X3) as a traceless 3x3 matrix."""
    I, Jv = state.IJ
    rows = phi_matrix(float(u[0]), float(u[1]), float(u[2]), I, Jv, state.T)
    return np.array([[float(np.squeeze(x)) for x in row] for row in rows])


def leaf_vector_field(state: LeafState, u) -> LeafState:
    """Derivative of the state along the frame direction with coefficients u."""
    u1, u2, u3 = (float(c) for c in u)
    T, a, b = state.T, state.a, state.b
    I, Jv = state.IJ
    zeta = u3 + 1j * u2
    rho = -u1 + I * u2 + Jv * u3
    dg = state.g @ connection_value(state, u)
    dT = (T * T + 1) * 2 * (a * zeta).real
    da = 1j * a * rho + (b + a * a * T) * zeta - 1.5 * T * np.conj(zeta)
    db = 2j * b * rho + (2 * a * b * T - (2 / 9) * a ** 3) * zeta - a * np.conj(zeta)
    return LeafState(dg, float(dT), complex(da), complex(db))


def _rhs(y: np.ndarray, u) -> np.ndarray:
    return leaf_vector_field(LeafState.from_vector(y), u).vector()


def _rk4(y, u, h):
    k1 = _rhs(y, u)
    k2 = _rhs(y + h / 2 * k1, u)
    k3 = _rhs(y + h / 2 * k2, u)
    k4 = _rhs(y + h * k3, u)
    return y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def _project(y: np.ndarray) -> np.ndarray:
    y = y.copy()
    y[:9] = renormalize(y[:9].reshape(3, 3)).ravel()
    return y


@dataclass(frozen=True, eq=False)
class LeafTrajectory:
    t: np.ndarray
    states: np.ndarray  # (n, 14) packed state vectors
    error_estimate: float

    def __getitem__(self, i) -> LeafState:
        return LeafState.from_vector(self.states[i])

    @property
    def final(self) -> LeafState:
        return self[-1]

    def conserved(self) -> tuple[np.ndarray, np.ndarray]:
        T = self.states[:, 9]
        a = self.states[:, 10] + 1j * self.states[:, 11]
        b = self.states[:, 12] + 1j * self.states[:, 13]
        return conserved_W(T, a, b), conserved_w(T, a, b)

    def rows(self) -> list[list[float]]:
        """CSV rows: t, g (row major), T, Re a, Im a, Re b, Im b, W, Re w, Im w."""
        W, w = self.conserved()
        return [[float(t), *map(float, s[:9]), *map(float, s[9:14]), float(Wk), float(wk.real), float(wk.imag)]
                for t, s, Wk, wk in zip(self.t, self.states, W, w)]


def leaf_integrate(state0: LeafState, path: ControlPath, step: float, monitor: bool = True) -> LeafTrajectory:
    """Fixed-step RK4 along each control segment, re-projecting g onto det = 1.

    With ``monitor`` every step is repeated as two half steps; the difference
    (divided by 15, the RK4 step-doubling factor) is the local error estimate.
    """
    y = _project(state0.vector())
    times, states = [0.0], [y]
    t = 0.0
    worst = 0.0
    for u, duration in path.segments:
        n = max(1, int(np.ceil(duration / step - 1e-12)))
        h = duration / n
        t0 = t
        for i in range(n):
            full = _rk4(y, u, h)
            if monitor:
                half = _rk4(_rk4(y, u, h / 2), u, h / 2)
                est = float(np.abs(half - full).max()) / 15
                worst = max(worst, est)
                if est > STEP_TOL:
                    raise StepTooLarge(f"local error estimate {est:.3g} exceeds {STEP_TOL}")
                full = half
            y = _project(full)
            times.append(t0 + (i + 1) * h)
            states.append(y)
        t = t0 + duration
    return LeafTrajectory(np.array(times), np.array(states), worst)


def theta_forms(state: LeafState, delta: np.ndarray) -> np.ndarray:
    """The eleven forms theta_0..theta_10 of the Pfaffian system on a tangent vector delta."""
    g = state.g
    dg = delta[:9].reshape(3, 3)
    phi = np.linalg.solve(g, dg)
    dT = delta[9]
    da = complex(delta[10], delta[11])
    db = complex(delta[12], delta[13])
    T, a, b = state.T, state.a, state.b
    I, Jv = state.IJ
    w1, w2, w3 = phi[1, 0], phi[2, 0], phi[2, 1]
    zeta = w3 + 1j * w2
    rho = -w1 + I * w2 + Jv * w3
    m = (I * w3 - Jv * w2) / 3
    t78 = da - 1j * a * rho - (b + a * a * T) * zeta + 1.5 * T * np.conj(zeta)
    t910 = db - 2j * b * rho - (2 * a * b * T - (2 / 9) * a ** 3) * zeta + a * np.conj(zeta)
    return np.array([
        phi[0, 0] - m, phi[1, 1] - m, phi[2, 2] + 2 * m,
        phi[0, 1] + phi[1, 0],
        phi[0, 2] + phi[2, 0] - T * w3,
        phi[1, 2] + phi[2, 1] + T * w2,
        dT - (T * T + 1) * 2 * (a * zeta).real,
        t78.real, t78.imag, t910.real, t910.imag,
    ])


@dataclass(frozen=True)
class HolonomyReport:
    eps: tuple
    transverse: tuple
    displacement: tuple
    order: float


def commutator_loop(state0: LeafState, eps: float, steps_per_leg: int = 16) -> np.ndarray:
    """Net state displacement around flow_X2(eps), flow_X3(eps), flow_X2(-eps), flow_X3(-eps)."""
    legs = (((0.0, 1.0, 0.0), eps), ((0.0, 0.0, 1.0), eps),
            ((0.0, -1.0, 0.0), eps), ((0.0, 0.0, -1.0), eps))
    traj = leaf_integrate(state0, ControlPath(legs), eps / steps_per_leg, monitor=False)
    return traj.states[-1] - traj.states[0]


def holonomy_defect(state0: LeafState, eps: float) -> HolonomyReport:
    """Transverse (theta-measured) loop defect at eps, eps/2, eps/4 and its fitted order."""
    eps_list = (eps, eps / 2, eps / 4)
    trans, disp = [], []
    for e in eps_list:
        delta = commutator_loop(state0, e)
        trans.append(float(np.linalg.norm(theta_forms(state0, delta))))
        disp.append(float(np.linalg.norm(delta)))
    with np.errstate(divide="ignore"):
        slope = np.polyfit(np.log(eps_list), np.log(np.maximum(trans, 1e-300)), 1)[0]
    return HolonomyReport(eps_list, tuple(trans), tuple(disp), float(slope))


@dataclass(frozen=True)
class CrossValidation:
    s: np.ndarray
    dT: float
    da: float
    db: float

    @property
    def max_deviation(self) -> float:
        return max(self.dT, self.da, self.db)


def cross_validate(C, pt: SigmaPoint, length: float, samples: int = 16,
                   step: float = np.pi / 400) -> CrossValidation:
    """(T, a, b) from the leaf ODE under pure X1 versus the chart pipeline along the geodesic."""
    N = C if isinstance(C, FinslerNorm) else FinslerNorm(C)
    inv0 = invariants_at(N, pt)
    state0 = LeafState(np.eye(3), inv0.T, inv0.a, inv0.b)
    s = np.linspace(0.0, length, samples + 1)
    pts, vel = resample_geodesic(N, pt.base, pt.velocity, s)
    sig = [sigma_from_vectors(N, p, w) for p, w in zip(pts, vel)]
    chart_inv = invariants_batch(N, sig)
    dT = da = db = 0.0
    y = state0
    for k in range(1, len(s)):
        traj = leaf_integrate(y, ControlPath.single((1.0, 0.0, 0.0), s[k] - s[k - 1]), step)
        y = traj.final
        ref = chart_inv[k]
        dT = max(dT, abs(y.T - ref.T))
        da = max(da, abs(y.a - ref.a))
        db = max(db, abs(y.b - ref.b))
    return CrossValidation(s, dT, da, db)
