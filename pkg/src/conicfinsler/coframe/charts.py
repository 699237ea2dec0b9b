"""Gnomonic charts on the sphere of rays and fiber angles on the unit tangent bundle.

Chart ``k`` sends (x1, x2) to the ray of R_k (x1, x2, 1), where R_k is a
rotation whose third column is one of the six axis directions.  A tangent
vector with chart velocity y is the class [R_k (x, 1), R_k (y, 0)].  Great
circles are straight lines in every chart.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import jets as J
from ..errors import OutOfChart
from ..finsler import FinslerNorm
from ..projmodel import RayPoint, ray_normalize

_E = np.eye(3)
ROTATIONS = np.array([
    np.column_stack(cols) for cols in (
        (_E[0], _E[1], _E[2]),
        (_E[1], _E[0], -_E[2]),
        (_E[1], _E[2], _E[0]),
        (_E[2], _E[1], -_E[0]),
        (_E[2], _E[0], _E[1]),
        (_E[0], _E[2], -_E[1]),
    )
])
CHART_NAMES = ("+z", "-z", "+x", "-x", "+y", "-y")
CHART_BOUND = 1.5
LIFT_TOL = 1e-12


@dataclass(frozen=True)
class Chart:
    index: int

    @property
    def rotation(self) -> np.ndarray:
        return ROTATIONS[self.index]

    @property
    def name(self) -> str:
        return CHART_NAMES[self.index]

    def ray(self, x) -> np.ndarray:
        """Representative R (x1, x2, 1) (batched over leading axes)."""
        x = np.asarray(x, dtype=float)
        return np.concatenate([x, np.ones(x.shape[:-1] + (1,))], axis=-1) @ self.rotation.T

    def tangent(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        return np.concatenate([y, np.zeros(y.shape[:-1] + (1,))], axis=-1) @ self.rotation.T

    def point(self, x) -> RayPoint:
        return ray_normalize(self.ray(x))

    def coords(self, v, w=None):
        """Chart coordinates of the ray [v] and, if given, the chart velocity of [v, w]."""
        V = np.asarray(v, dtype=float) @ self.rotation
        if np.any(V[..., 2] <= 0):
            raise OutOfChart(f"ray is not in the hemisphere of chart {self.name}")
        x = V[..., :2] / V[..., 2:]
        if w is None:
            return x
        W = np.asarray(w, dtype=float) @ self.rotation
        y = (W[..., :2] * V[..., 2:] - V[..., :2] * W[..., 2:]) / V[..., 2:] ** 2
        return x, y


def best_chart(v) -> Chart:
    """The chart whose centre is closest to the ray of v."""
    centres = ROTATIONS[:, :, 2]
    return Chart(int(np.argmax(centres @ np.asarray(v, dtype=float))))


def check_domain(x) -> None:
    if np.any(np.linalg.norm(np.asarray(x, dtype=float), axis=-1) > CHART_BOUND):
        raise OutOfChart(f"chart coordinates exceed the bound {CHART_BOUND}")


@dataclass(frozen=True, eq=False)
class SigmaPoint:
    """A unit tangent vector in chart coordinates (x1, x2, fiber angle theta)."""

    chart: Chart
    x: np.ndarray
    theta: float
    lift: np.ndarray  # chart velocity u with F(x, u) = 1

    @property
    def base(self) -> np.ndarray:
        return self.chart.ray(self.x)

    @property
    def velocity(self) -> np.ndarray:
        return self.chart.tangent(self.lift)

    @property
    def z(self) -> np.ndarray:
        return np.array([self.x[0], self.x[1], self.theta])


def lift(N: FinslerNorm, chart: Chart, x, theta) -> np.ndarray:
    """Chart velocity of norm one pointing in the Euclidean direction theta."""
    e = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    length = N.value(chart.ray(x), chart.tangent(e))
    return e / np.asarray(length)[..., None]


def sigma_point(N: FinslerNorm, chart, x1: float, x2: float, theta: float) -> SigmaPoint:
    chart = chart if isinstance(chart, Chart) else Chart(int(chart))
    x = np.array([x1, x2], dtype=float)
    check_domain(x)
    theta = float(theta)
    u = lift(N, chart, x, theta)
    return SigmaPoint(chart, x, theta, u)


def sigma_from_vectors(N: FinslerNorm, v, w, chart: Chart | None = None) -> SigmaPoint:
    """The unit tangent vector in the direction of the class [v, w]."""
    chart = best_chart(v) if chart is None else chart
    x, y = chart.coords(v, w)
    return sigma_point(N, chart, x[0], x[1], float(np.arctan2(y[1], y[0])))


def transition_jet(source: Chart, target: Chart, z: list) -> list:
    """Coordinates (x1', x2', theta') in ``target`` as jets of the ``source`` coordinates z."""
    x1, x2, th = z
    v = J.matvec(target.rotation.T @ source.rotation, J.stack([x1, x2, 1.0]))
    w = J.matvec(target.rotation.T @ source.rotation, J.stack([J.cos(th), J.sin(th), 0.0]))
    inv = 1.0 / v[..., 2]
    y1 = (w[..., 0] * v[..., 2] - v[..., 0] * w[..., 2]) * inv * inv
    y2 = (w[..., 1] * v[..., 2] - v[..., 1] * w[..., 2]) * inv * inv
    return [v[..., 0] * inv, v[..., 1] * inv, J.angle(y1, y2)]


def change_chart(N: FinslerNorm, pt: SigmaPoint, target: Chart) -> SigmaPoint:
    x, y = target.coords(pt.base, pt.velocity)
    return sigma_point(N, target, x[0], x[1], float(np.arctan2(y[1], y[0])))


def random_sigma_points(N: FinslerNorm, rng: np.random.Generator, n: int) -> list[SigmaPoint]:
    """Uniform rays, uniform fiber angles, each in its best chart."""
    out = []
    for _ in range(n):
        v = rng.standard_normal(3)
        chart = best_chart(v)
        x = chart.coords(v)
        out.append(sigma_point(N, chart, x[0], x[1], rng.uniform(0, 2 * np.pi)))
    return out
