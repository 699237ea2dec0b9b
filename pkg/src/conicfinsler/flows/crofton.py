"""Crofton's formula: curve length from the measure of geodesics crossing it.

Oriented geodesics are oriented great circles, labelled by their unit normal
xi (the covector of the oriented line).  The measure on this space is the
push-forward of omega2 ^ omega3 = -d omega1, so its density against the round
area of xi is |d omega1| / |l* dA| at any unit vector on the geodesic, where
l(v, w) = v x w / |v x w|.  Only first-order jets of omega1 are needed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import jets as J
from ..errors import NonImmersed
from ..finsler import FinslerNorm
from ..coframe.cartan import TwoForm, chart_variables, hilbert_form_jet
from ..coframe.charts import ROTATIONS, Chart

CHUNK = 100_000


@dataclass(frozen=True)
class CroftonReport:
    lhs: float
    rhs: float
    rel_err: float
    rhs_minus: float
    std_err: float
    samples: int


def measure_density(N: FinslerNorm, chart: Chart, z: np.ndarray) -> np.ndarray:
    """Density of the geodesic measure against round area, at unit vectors z (m, 3) of one chart."""
    zj = chart_variables(z, 1)
    d1 = TwoForm(hilbert_form_jet(N, chart, zj))
    x1, x2, th = zj
    R = chart.rotation
    v = J.matvec(R, J.stack([x1, x2, 1.0]))
    w = J.matvec(R, J.stack([J.cos(th), J.sin(th), 0.0]))
    xi = J.cross(v, w)
    val = J.value(xi)
    grads = [xi.deriv(j).value for j in range(3)]  # order-0 jets of d xi / dz_j
    inv3 = 1.0 / np.linalg.norm(val, axis=-1) ** 3
    num, den = 0.0, 0.0
    for (j, k), c in d1.c.items():
        area = np.einsum("mi,mi->m", val, np.cross(grads[j], grads[k])) * inv3
        num = num + c.value ** 2
        den = den + area ** 2
    return np.sqrt(num / den)


def _representatives(xi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """A unit vector (x0, w) on each oriented great circle with normal xi."""
    helper = np.eye(3)[np.argmin(np.abs(xi), axis=1)]
    x0 = np.cross(xi, helper)
    x0 /= np.linalg.norm(x0, axis=1, keepdims=True)
    return x0, np.cross(xi, x0)


def density_at(N: FinslerNorm, xi: np.ndarray) -> np.ndarray:
    """Geodesic-measure density at normals xi (m, 3)."""
    xi = np.atleast_2d(xi)
    x0, w = _representatives(xi)
    centres = ROTATIONS[:, :, 2]
    charts = np.argmax(x0 @ centres.T, axis=1)
    out = np.empty(len(xi))
    for k in np.unique(charts):
        idx = np.nonzero(charts == k)[0]
        ch = Chart(int(k))
        x, y = ch.coords(x0[idx], w[idx])
        z = np.column_stack([x, np.arctan2(y[:, 1], y[:, 0])])
        out[idx] = measure_density(N, ch, z)
    return out


def _tangents(curve: np.ndarray) -> np.ndarray:
    """Spectral derivative of a closed curve sampled uniformly in a 2 pi parameter."""
    m = len(curve)
    k = np.fft.fftfreq(m, d=1.0 / m)
    if m % 2 == 0:
        k[m // 2] = 0
    return np.real(np.fft.ifft(1j * k[:, None] * np.fft.fft(curve, axis=0), axis=0))


def curve_length(N: FinslerNorm, curve: np.ndarray, reverse: bool = False) -> float:
    dc = _tangents(curve)
    if reverse:
        dc = -dc
    return float(np.mean(N.value(curve, dc)) * 2 * np.pi)


def crossing_counts(xi: np.ndarray, curve: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Upward and downward sign changes of xi . c(t) around the closed curve."""
    h = xi @ curve.T
    sgn = h > 0
    nxt = np.roll(sgn, -1, axis=1)
    return (~sgn & nxt).sum(axis=1), (sgn & ~nxt).sum(axis=1)


def crofton_check(C, curve: np.ndarray, mc_samples: int, seed: int = 0) -> CroftonReport:
    """Compare L(c) + L(-c) with the Monte-Carlo integral of upward crossing counts.

    ``curve`` holds points of a closed curve, uniformly spaced in a 2 pi periodic
    parameter (the last sample must not repeat the first).  Normals are drawn
    uniformly on the sphere from a counter-based generator, chunk by chunk, so
    results do not depend on the chunk size.
    """
    N = C if isinstance(C, FinslerNorm) else FinslerNorm(C)
    curve = np.asarray(curve, dtype=float)
    if np.any(np.linalg.norm(curve - np.roll(curve, -1, axis=0), axis=1) == 0):
        raise NonImmersed("consecutive curve samples coincide")
    lhs = curve_length(N, curve) + curve_length(N, curve, reverse=True)
    rng = np.random.Generator(np.random.Philox(seed))
    total_up = total_down = total_sq = 0.0
    done = 0
    while done < mc_samples:
        m = min(CHUNK, mc_samples - done)
        xi = rng.standard_normal((m, 3))
        xi /= np.linalg.norm(xi, axis=1, keepdims=True)
        up, down = crossing_counts(xi, curve)
        hit = (up > 0) | (down > 0)
        dens = np.zeros(m)
        if hit.any():
            dens[hit] = density_at(N, xi[hit])
        total_up += float(np.sum(up * dens))
        total_down += float(np.sum(down * dens))
        total_sq += float(np.sum((up * dens) ** 2))
        done += m
    area = 4 * np.pi
    rhs = area * total_up / mc_samples
    rhs_minus = area * total_down / mc_samples
    var = total_sq / mc_samples - (total_up / mc_samples) ** 2
    std = area * np.sqrt(max(var, 0.0) / mc_samples)
    return CroftonReport(lhs, rhs, abs(rhs - lhs) / lhs, rhs_minus, std, mc_samples)


def small_circle(center, radius: float, m: int = 512) -> np.ndarray:
    center = np.asarray(center, dtype=float)
    center = center / np.linalg.norm(center)
    helper = np.eye(3)[int(np.argmin(np.abs(center)))]
    e1 = np.cross(center, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(center, e1)
    t = 2 * np.pi * np.arange(m) / m
    return (np.cos(radius) * center + np.sin(radius) * (np.cos(t)[:, None] * e1 + np.sin(t)[:, None] * e2))


def wobbly_curve(center, radius: float, harmonics, m: int = 512) -> np.ndarray:
    """Closed curve r(t) = radius (1 + sum a_k cos(k t + phase_k)) around ``center`` (geodesic polar)."""
    center = np.asarray(center, dtype=float)
    center = center / np.linalg.norm(center)
    helper = np.eye(3)[int(np.argmin(np.abs(center)))]
    e1 = np.cross(center, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(center, e1)
    t = 2 * np.pi * np.arange(m) / m
    r = radius * (1 + sum(a * np.cos(k * t + ph) for k, a, ph in harmonics))
    return (np.cos(r)[:, None] * center
            + np.sin(r)[:, None] * (np.cos(t)[:, None] * e1 + np.sin(t)[:, None] * e2))
