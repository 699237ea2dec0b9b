"""Canonical coframing of the unit tangent bundle, computed on Taylor jets.

All fields live in chart coordinates z = (x1, x2, theta) of the unit tangent
bundle.  Each step of the construction consumes one derivative, so a jet of
order ``n`` in z yields the coframe to order ``n - 3`` and the curvature
functions to order ``n - 4``; see :data:`ORDER_FOR`.

Construction:

1. omega1 is the Hilbert form, the fiber gradient of the norm paired with dx.
2. X1 spans the kernel of d omega1 and is normalized by omega1(X1) = 1.
3. eta = dtheta - X1^theta omega1 and a semibasic form killing X1 complete
   omega1 to a coframe; d omega1 is a multiple of their wedge.
4. A scale s and a shear kappa fix omega2 and omega3 from the structure
   equations d omega2 = omega1^omega3 - I omega2^omega3 and
   d omega3 = -K omega1^omega2 + J omega3^omega2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import jets as J
from ..errors import DegenerateContact
from ..finsler import FinslerNorm
from .charts import Chart, SigmaPoint

CONTACT_TOL = 1e-10

# jet order needed for what a caller wants to read off at the point
ORDER_FOR = {"frame": 3, "curvature": 4, "first": 5, "second": 6}


class TwoForm:
    """Exterior derivative of a 1-form field given by its jet components."""

    def __init__(self, form: J.Jet):
        comps = [form[..., k] for k in range(3)]
        self.c = {(j, k): comps[k].deriv(j) - comps[j].deriv(k)
                  for j in range(3) for k in range(j + 1, 3)}

    def __call__(self, X, Y):
        out = 0.0
        for (j, k), c in self.c.items():
            out = out + c * (X[..., j] * Y[..., k] - X[..., k] * Y[..., j])
        return out

    def kernel(self):
        """Vector field spanning the kernel (Hodge dual of the components)."""
        return J.stack([self.c[(1, 2)], -self.c[(0, 2)], self.c[(0, 1)]])


def pair(form, X):
    return J.dot(form, X)


def frame_derivative(f: J.Jet, X) -> J.Jet:
    """df(X) for a scalar field f and a vector field X (both jets)."""
    out = 0.0
    for j in range(3):
        out = out + f.deriv(j) * X[..., j]
    return out


def dual_frame(forms) -> list:
    inv = J.inv3(J.stack(forms, axis=-2))
    return [inv[..., :, a] for a in range(3)]


@dataclass
class CoframeJets:
    """Jets of the coframe, its dual frame and I, J, K around a batch of points."""

    chart: Chart
    z: np.ndarray  # (n, 3) expansion points
    order: int
    omega: list
    frame: list
    I: J.Jet
    J: J.Jet | None
    K: J.Jet | None
    checks: dict = field(default_factory=dict)

    def deriv(self, f, a: int):
        """Frame derivative f_a = df(X_a) (indices 1, 2, 3)."""
        return frame_derivative(f, self.frame[a - 1])


def chart_variables(z, order: int) -> list:
    z = np.atleast_2d(np.asarray(z, dtype=float))
    return J.Jet.variables(J.space(3, order), [z[:, 0], z[:, 1], z[:, 2]])


def hilbert_form_jet(N: FinslerNorm, chart: Chart, zj: list):
    x1, x2, th = zj
    R = chart.rotation
    v = J.matvec(R, J.stack([x1, x2, 1.0]))
    w = J.matvec(R, J.stack([J.cos(th), J.sin(th), 0.0]))
    g = N.grad_w(v, w)
    return J.stack([J.dot(g, R[:, 0]), J.dot(g, R[:, 1]), 0.0])


def coframe_jets(N: FinslerNorm, chart: Chart, z, order: int) -> CoframeJets:
    """Run the construction on jets of the given order at the points z (n, 3)."""
    z = np.atleast_2d(np.asarray(z, dtype=float))
    zj = chart_variables(z, order)
    omega1 = hilbert_form_jet(N, chart, zj)
    d1 = TwoForm(omega1)
    k = d1.kernel()
    X1 = k / J.expand_dims(pair(omega1, k))

    omega2t = J.stack([-X1[..., 1], X1[..., 0], 0.0])
    eta = J.stack([-X1[..., 2] * omega1[..., 0], -X1[..., 2] * omega1[..., 1], 1.0])
    Y = dual_frame([omega1, omega2t, eta])
    c = d1(Y[1], Y[2])
    if np.any(np.abs(J.value(c)) < CONTACT_TOL):
        raise DegenerateContact("d omega1 degenerates on the contact plane")
    omega3t = eta * J.expand_dims(-c)

    Yt = dual_frame([omega1, omega2t, omega3t])
    s2 = 1.0 / TwoForm(omega2t)(Yt[0], Yt[2])
    if np.any(J.value(s2) <= 0):
        raise DegenerateContact("scale of the second form is not positive")
    s = J.sqrt(s2)
    omega2 = omega2t * J.expand_dims(s)
    omega3_0 = omega3t / J.expand_dims(s)

    checks = {}
    I = Jv = K = None
    frame = Yt
    omega3 = omega3_0
    if s.order >= 1:
        Z = dual_frame([omega1, omega2, omega3_0])
        d2 = TwoForm(omega2)
        A, B, C = d2(Z[1], Z[2]), d2(Z[2], Z[0]), d2(Z[0], Z[1])
        I = -A
        kappa = -C / B
        checks["d2_scale"] = B + 1.0
        omega3 = omega3_0 + omega2 * J.expand_dims(kappa)
        frame = dual_frame([omega1, omega2, omega3])
        if omega3.order >= 1:
            d3 = TwoForm(omega3)
            X = frame
            K = -d3(X[0], X[1])
            Jv = -d3(X[1], X[2])
            checks["d3_13"] = d3(X[0], X[2])
            checks["d1"] = [d1(X[0], X[1]), d1(X[0], X[2]), d1(X[1], X[2]) + 1.0]
            checks["d2"] = [d2(X[0], X[1]), d2(X[0], X[2]) - 1.0, d2(X[1], X[2]) + I]
    return CoframeJets(chart, z, order, [omega1, omega2, omega3], frame, I, Jv, K, checks)


@dataclass(frozen=True, eq=False)
class Coframe:
    """Coframe at one point: rows are components in the (dx1, dx2, dtheta) basis."""

    point: SigmaPoint
    omega: np.ndarray  # (3, 3), omega[a] = omega_{a+1}
    frame: np.ndarray  # (3, 3), frame[a] = X_{a+1}
    I: float
    J: float
    K: float
    structure_residuals: tuple[float, float, float]

    def duality_residual(self) -> float:
        return float(np.abs(self.omega @ self.frame.T - np.eye(3)).max())


def _point_z(pt: SigmaPoint) -> np.ndarray:
    return pt.z[None, :]


def hilbert_form(N: FinslerNorm, pt: SigmaPoint) -> np.ndarray:
    """omega1 components at pt, in the (dx1, dx2, dtheta) basis."""
    zj = chart_variables(_point_z(pt), 0)
    return J.value(hilbert_form_jet(N, pt.chart, zj))[0]


def coframe_from_jets(cj: CoframeJets, i: int, pt: SigmaPoint) -> Coframe:
    val = lambda f: np.asarray(J.value(f))[i]
    omega = np.array([val(w) for w in cj.omega])
    frame = np.array([val(X) for X in cj.frame])
    # structure equations on the frame basis; each entry vanishes for the canonical coframe
    r1 = max(abs(val(r)) for r in cj.checks["d1"])
    r2 = max(abs(val(r)) for r in cj.checks["d2"])
    r3 = abs(val(cj.checks["d3_13"]))
    return Coframe(pt, omega, frame, float(val(cj.I)), float(val(cj.J)), float(val(cj.K)),
                   (float(r1), float(r2), float(r3)))


def cartan_coframe(N: FinslerNorm, pt: SigmaPoint) -> Coframe:
    cj = coframe_jets(N, pt.chart, _point_z(pt), ORDER_FOR["curvature"])
    return coframe_from_jets(cj, 0, pt)
