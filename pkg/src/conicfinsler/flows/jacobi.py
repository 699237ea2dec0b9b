"""Jacobi fields along geodesics and the first conjugate point."""

from __future__ import annotations

from typing import Callable

import numpy as np
from scipy.integrate import simpson
from scipy.optimize import brentq

from ..errors import GeometryError, NoConjugatePoint
from ..finsler import FinslerNorm
from ..coframe.charts import best_chart
from ..coframe.invariants import curvature_batch
from .geodesics import GeodesicTrace, resample_geodesic


def curvature_along(N: FinslerNorm, points: np.ndarray, velocities: np.ndarray) -> np.ndarray:
    """K at the unit tangent vectors [points_i, velocities_i]."""
    points = np.atleast_2d(points)
    charts = [best_chart(p) for p in points]
    out = np.empty(len(points))
    groups: dict[int, list[int]] = {}
    for i, ch in enumerate(charts):
        groups.setdefault(ch.index, []).append(i)
    for _, idx in groups.items():
        ch = charts[idx[0]]
        x, y = ch.coords(points[idx], velocities[idx])
        z = np.column_stack([x, np.arctan2(y[:, 1], y[:, 0])])
        out[idx] = curvature_batch(N, ch, z)
    return out


def _hermite_root(s0, h, y0, dy0, y1, dy1) -> float:
    def cubic(t):
        u = (t - s0) / h
        h00, h10 = 2 * u ** 3 - 3 * u ** 2 + 1, u ** 3 - 2 * u ** 2 + u
        h01, h11 = -2 * u ** 3 + 3 * u ** 2, u ** 3 - u ** 2
        return h00 * y0 + h10 * h * dy0 + h01 * y1 + h11 * h * dy1
    return brentq(cubic, s0, s0 + h, xtol=1e-15)


def jacobi_conjugate(N: FinslerNorm, trace: GeodesicTrace,
                     curvature: Callable[[np.ndarray], np.ndarray] | None = None) -> float:
    """First zero s* > 0 of y'' + K y = 0, y(0) = 0, y'(0) = 1, along the trace.

    RK4 uses the trace samples as nodes: steps of two sample spacings with the
    middle sample as the half-step.  ``curvature`` overrides K(s) when given.
    """
    s = trace.s
    if s[-1] <= np.pi:
        raise GeometryError("trace must be longer than pi")
    ds = np.diff(s)
    if np.ptp(ds) > 1e-9 * ds.mean():
        raise GeometryError("trace samples must be uniform in arc length")
    K = curvature(s) if curvature is not None else curvature_along(N, trace.points, trace.velocities)
    y, dy = 0.0, 1.0
    for i in range(0, len(s) - 2, 2):
        h = s[i + 2] - s[i]
        k0, km, k1 = K[i], K[i + 1], K[i + 2]
        f = lambda yy, dd, kk: (dd, -kk * yy)
        a1 = f(y, dy, k0)
        a2 = f(y + h / 2 * a1[0], dy + h / 2 * a1[1], km)
        a3 = f(y + h / 2 * a2[0], dy + h / 2 * a2[1], km)
        a4 = f(y + h * a3[0], dy + h * a3[1], k1)
        ny = y + h / 6 * (a1[0] + 2 * a2[0] + 2 * a3[0] + a4[0])
        nd = dy + h / 6 * (a1[1] + 2 * a2[1] + 2 * a3[1] + a4[1])
        if i > 0 and y > 0 >= ny:
            return _hermite_root(s[i], h, y, dy, ny, nd)
        y, dy = ny, nd
    raise NoConjugatePoint("no zero of the Jacobi field along the trace")


def jacobi_trace(N: FinslerNorm, v, w, length: float = 4.0, n: int = 1601) -> GeodesicTrace:
    """Uniform samples of the geodesic through [v, w] on [0, length], for Jacobi work."""
    s = np.linspace(0.0, length, n)
    pts, vel = resample_geodesic(N, v, w, s)
    return GeodesicTrace(s, pts, vel, float(length), np.zeros(n))


def index_form(N: FinslerNorm, v, w, s0: float, ell: float, n: int = 401) -> float:
    """Second variation integral of f = sin(pi (s - s0)/ell) on [s0, s0 + ell]."""
    s = np.linspace(s0, s0 + ell, n)
    pts, vel = resample_geodesic(N, v, w, s)
    K = curvature_along(N, pts, vel)
    f = np.sin(np.pi * (s - s0) / ell)
    df = np.pi / ell * np.cos(np.pi * (s - s0) / ell)
    return float(simpson(df ** 2 - K * f ** 2, x=s))
