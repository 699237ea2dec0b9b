"""Geodesics: the projective great-circle parametrization and direct integration.

Two independent routes to the same curves.  :func:`geodesic_line` uses the
unit-speed basis read off from the conic, so that s -> [cos s v0 + sin s v1]
is a unit-speed geodesic of period 2 pi.  :func:`spray_integrate` integrates
the Euler-Lagrange equations of E = F^2/2 in gnomonic charts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import jets as J
from ..conics import ConicQuadric, unit_speed_basis
from ..errors import HessianSingular, NonImmersed
from ..finsler import FinslerNorm
from ..projmodel import as_vec3, line_through
from ..coframe.charts import CHART_BOUND, Chart, best_chart

HESSIAN_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class GeodesicTrace:
    """Samples of a unit-speed curve: unit ray reps, velocities tangent to the sphere."""

    s: np.ndarray
    points: np.ndarray  # (n, 3), unit vectors
    velocities: np.ndarray  # (n, 3), w with [points, w] of unit norm
    total_length: float
    unit_residual: np.ndarray

    def __len__(self):
        return len(self.s)

    def chart_rows(self) -> list[tuple[float, float, float, int, float]]:
        """(s, x1, x2, chart, unit_residual) with each sample in its best chart."""
        rows = []
        for s, v, r in zip(self.s, self.points, self.unit_residual):
            ch = best_chart(v)
            x = ch.coords(v)
            rows.append((float(s), float(x[0]), float(x[1]), ch.index, float(r)))
        return rows


def _norm(C) -> FinslerNorm:
    return C if isinstance(C, FinslerNorm) else FinslerNorm(C)


def _tangent_part(points: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Canonical velocity representative (orthogonal to the unit point)."""
    return w - np.einsum("ij,ij->i", w, points)[:, None] * points


def unit_speed_frame(C, v, w) -> tuple[np.ndarray, np.ndarray]:
    """(v0, v1) with s -> [cos s v0 + sin s v1] the unit-speed geodesic through [v, w]."""
    N = _norm(C)
    v, w = as_vec3(v), as_vec3(w)
    line_through(v, w)  # raises DegenerateSpan for dependent input
    a2, b2 = unit_speed_basis(ConicQuadric.from_complex(N.matrix), v, w)
    return v, b2 * w + a2 * v


def geodesic_line(C, v, w, n: int = 1025) -> GeodesicTrace:
    N = _norm(C)
    v0, v1 = unit_speed_frame(N, v, w)
    s = np.linspace(0.0, 2 * np.pi, n)
    gamma = np.cos(s)[:, None] * v0 + np.sin(s)[:, None] * v1
    dgamma = -np.sin(s)[:, None] * v0 + np.cos(s)[:, None] * v1
    speed = N.value(gamma, dgamma)
    scale = np.linalg.norm(gamma, axis=1)
    points = gamma / scale[:, None]
    # [gamma, gamma'] = [points, gamma'/|gamma|] as tangent classes
    vel = _tangent_part(points, dgamma / scale[:, None])
    # periodic trapezoid rule on the 2 pi loop (last sample repeats the first)
    length = float(np.mean(speed[:-1]) * 2 * np.pi)
    return GeodesicTrace(s, points, vel, length, np.abs(speed - 1.0))


def resample_geodesic(C, v, w, s) -> tuple[np.ndarray, np.ndarray]:
    """Unit points and velocities of the geodesic through [v, w] at arc lengths s."""
    N = _norm(C)
    v0, v1 = unit_speed_frame(N, v, w)
    s = np.asarray(s, dtype=float)
    gamma = np.cos(s)[:, None] * v0 + np.sin(s)[:, None] * v1
    dgamma = -np.sin(s)[:, None] * v0 + np.cos(s)[:, None] * v1
    scale = np.linalg.norm(gamma, axis=1)
    points = gamma / scale[:, None]
    return points, _tangent_part(points, dgamma / scale[:, None])


def collinearity_residual(trace: GeodesicTrace) -> float:
    """Largest distance from a supporting line in any chart, over the samples in that chart."""
    worst = 0.0
    for k in range(6):
        ch = Chart(k)
        V = trace.points @ ch.rotation
        inside = V[:, 2] > 0
        if inside.sum() < 3:
            continue
        x = V[inside, :2] / V[inside, 2:]
        x = x[np.linalg.norm(x, axis=1) <= CHART_BOUND]
        if len(x) < 3:
            continue
        i, j = np.unravel_index(np.argmax(np.linalg.norm(x[:, None] - x[None], axis=2)), (len(x),) * 2)
        d = x[j] - x[i]
        normal = np.array([-d[1], d[0]]) / np.linalg.norm(d)
        worst = max(worst, float(np.abs((x - x[i]) @ normal).max()))
    return worst


def closure_residual(trace: GeodesicTrace) -> float:
    """Chart distance between first and last samples."""
    ch = best_chart(trace.points[0])
    return float(np.linalg.norm(ch.coords(trace.points[-1]) - ch.coords(trace.points[0])))


def _energy_derivatives(N: FinslerNorm, chart: Chart, x, y):
    """E = F^2/2 with its x-gradient, mixed Hessian E_yx and fiber Hessian E_yy."""
    sp = J.space(4, 2)
    x1, x2, y1, y2 = J.Jet.variables(sp, [x[0], x[1], y[0], y[1]])
    R = chart.rotation
    v = J.matvec(R, J.stack([x1, x2, 1.0]))
    w = J.matvec(R, J.stack([y1, y2, 0.0]))
    F = N.value(v, w)
    E = F * F * 0.5
    d = lambda *alpha: float(E.derivative_value(alpha))
    Ex = np.array([d(1, 0, 0, 0), d(0, 1, 0, 0)])
    Eyx = np.array([[d(1, 0, 1, 0), d(0, 1, 1, 0)], [d(1, 0, 0, 1), d(0, 1, 0, 1)]])
    Eyy = np.array([[d(0, 0, 2, 0), d(0, 0, 1, 1)], [d(0, 0, 1, 1), d(0, 0, 0, 2)]])
    return float(F.value), Ex, Eyx, Eyy


def spray_acceleration(N: FinslerNorm, chart: Chart, x, y) -> np.ndarray:
    _, Ex, Eyx, Eyy = _energy_derivatives(N, chart, x, y)
    if abs(np.linalg.det(Eyy)) < HESSIAN_TOL:
        raise HessianSingular("fiber Hessian is singular")
    return np.linalg.solve(Eyy, Ex - Eyx @ y)


def _switch_chart(chart: Chart, x, y):
    v = chart.ray(x)
    new = best_chart(v / np.linalg.norm(v))
    if new.index == chart.index:
        return chart, x, y
    nx, ny = new.coords(v, chart.tangent(y))
    return new, nx, ny


def spray_integrate(N: FinslerNorm, chart, x, theta: float, length: float, steps: int) -> GeodesicTrace:
    """RK4 on the Euler-Lagrange system, starting at the unit vector of angle theta at x."""
    chart = chart if isinstance(chart, Chart) else Chart(int(chart))
    x = np.asarray(x, dtype=float)
    e = np.array([np.cos(theta), np.sin(theta)])
    y = e / N.value(chart.ray(x), chart.tangent(e))
    h = length / steps

    def rhs(state, ch):
        xs, ys = state[:2], state[2:]
        return np.concatenate([ys, spray_acceleration(N, ch, xs, ys)])

    s_vals, pts, vels, res = [], [], [], []

    def record(s, ch, xs, ys):
        v = ch.ray(xs)
        scale = np.linalg.norm(v)
        p = v / scale
        w = ch.tangent(ys) / scale
        s_vals.append(s)
        pts.append(p)
        vels.append(w - (w @ p) * p)
        res.append(abs(float(N.value(v, ch.tangent(ys))) - 1.0))

    state = np.concatenate([x, y])
    record(0.0, chart, state[:2], state[2:])
    for k in range(steps):
        if np.linalg.norm(state[:2]) > CHART_BOUND:
            chart, nx, ny = _switch_chart(chart, state[:2], state[2:])
            state = np.concatenate([nx, ny])
        k1 = rhs(state, chart)
        k2 = rhs(state + h / 2 * k1, chart)
        k3 = rhs(state + h / 2 * k2, chart)
        k4 = rhs(state + h * k3, chart)
        state = state + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        record((k + 1) * h, chart, state[:2], state[2:])
    pts_a = np.array(pts)
    if np.any(np.linalg.norm(np.diff(pts_a, axis=0), axis=1) == 0):
        raise NonImmersed("integration stalled")
    return GeodesicTrace(np.array(s_vals), pts_a, np.array(vels), float(length), np.array(res))
