"""Finite-difference reference for the jet-based coframe computations.

Only the coframe values and I, J, K at single points come from the jet
pipeline here; every further derivative is a central difference, either on
chart coordinates (exterior derivatives) or along short flows of the frame
fields (frame derivatives).  With ``richardson=True`` the step-h and step-h/2
differences are combined to cancel the O(h^2) term.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .. import jets as J
from ..finsler import FinslerNorm
from .cartan import ORDER_FOR, coframe_jets
from .charts import Chart, SigmaPoint
from .invariants import conserved_pq

H1, H2 = 1e-4, 1e-3

Field = Callable[[np.ndarray], np.ndarray]


class Oracle:
    """Point-value fields on one chart, suitable for differencing."""

    def __init__(self, N: FinslerNorm, chart: Chart):
        self.N = N
        self.chart = chart

    def frame(self, z: np.ndarray) -> np.ndarray:
        """(m, 3, 3): frame[:, a] = X_{a+1} at each point."""
        cj = coframe_jets(self.N, self.chart, z, ORDER_FOR["frame"])
        return np.stack([J.value(X) for X in cj.frame], axis=1)

    def coframe(self, z: np.ndarray) -> np.ndarray:
        cj = coframe_jets(self.N, self.chart, z, ORDER_FOR["frame"])
        return np.stack([J.value(w) for w in cj.omega], axis=1)

    def scalar(self, name: str) -> Field:
        order = ORDER_FOR["frame"] if name == "I" else ORDER_FOR["curvature"]

        def fn(z):
            cj = coframe_jets(self.N, self.chart, z, order)
            return np.asarray(J.value(getattr(cj, name)))
        return fn

    def flow(self, z: np.ndarray, a: int, h: float) -> np.ndarray:
        """One RK4 step of length h along X_a (a in 1..3)."""
        X = lambda p: self.frame(p)[:, a - 1]
        k1 = X(z)
        k2 = X(z + h / 2 * k1)
        k3 = X(z + h / 2 * k2)
        k4 = X(z + h * k3)
        return z + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)

    def frame_derivative(self, fn: Field, z: np.ndarray, a: int, h: float = H1,
                         richardson: bool = True) -> np.ndarray:
        z = np.atleast_2d(z)
        m = len(z)
        steps = (h, -h, h / 2, -h / 2) if richardson else (h, -h)
        moved = np.concatenate([self.flow(z, a, s) for s in steps])
        vals = fn(moved)
        parts = [vals[i * m:(i + 1) * m] for i in range(len(steps))]
        coarse = (parts[0] - parts[1]) / (2 * h)
        if not richardson:
            return coarse
        fine = (parts[2] - parts[3]) / h
        return (4 * fine - coarse) / 3

    def exterior(self, field: Field, z: np.ndarray, h: float = H1) -> np.ndarray:
        """(m, 3, 3) components (d alpha)_{jk} = d_j alpha_k - d_k alpha_j of a 1-form field."""
        z = np.atleast_2d(z)
        m = len(z)
        shifts = []
        for j in range(3):
            for s in (h, -h, h / 2, -h / 2):
                zz = z.copy()
                zz[:, j] += s
                shifts.append(zz)
        vals = field(np.concatenate(shifts))
        grad = np.empty((m, 3, 3))
        for j in range(3):
            p = [vals[(4 * j + i) * m:(4 * j + i + 1) * m] for i in range(4)]
            coarse = (p[0] - p[1]) / (2 * h)
            fine = (p[2] - p[3]) / h
            grad[:, j] = (4 * fine - coarse) / 3
        return grad - np.swapaxes(grad, 1, 2)


def two_form(d: np.ndarray, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    return np.einsum("mjk,mj,mk->m", d, X, Y)


def structure_check(N: FinslerNorm, pt: SigmaPoint, h: float = H1) -> dict:
    """Differenced exterior derivatives of the jet coframe against the structure equations."""
    orc = Oracle(N, pt.chart)
    z = pt.z[None, :]
    omega = orc.coframe(z)
    X = orc.frame(z)[0].T  # columns X_a
    d = [orc.exterior(lambda zz, k=k: orc.coframe(zz)[:, k], z, h)[0] for k in range(3)]
    ev = lambda dk, a, b: float(X[:, a] @ dk @ X[:, b])
    I = -ev(d[1], 1, 2)
    K = -ev(d[2], 0, 1)
    Jv = -ev(d[2], 1, 2)
    res1 = max(abs(ev(d[0], 0, 1)), abs(ev(d[0], 0, 2)), abs(ev(d[0], 1, 2) + 1))
    res2 = max(abs(ev(d[1], 0, 1)), abs(ev(d[1], 0, 2) - 1))
    res3 = abs(ev(d[2], 0, 2))
    return {"I": I, "J": Jv, "K": K, "omega": omega[0], "residuals": (res1, res2, res3)}


def frame_derivative_invariants(N: FinslerNorm, pt: SigmaPoint, h1: float = H1, h2: float = H2,
                                richardson: bool = True, second: bool = True) -> dict:
    """I, J, K frame derivatives, Bianchi and flatness residuals, T, a, b by flow differencing."""
    orc = Oracle(N, pt.chart)
    z = pt.z[None, :]
    fI, fJ, fK = orc.scalar("I"), orc.scalar("J"), orc.scalar("K")
    D = lambda fn, a, zz, h=h1: orc.frame_derivative(fn, zz, a, h, richardson)
    out = {"I": fI(z)[0], "J": fJ(z)[0], "K": fK(z)[0]}
    for name, fn in (("I", fI), ("J", fJ), ("K", fK)):
        for a in (1, 2, 3):
            out[f"{name}{a}"] = D(fn, a, z)[0]
    out["bianchi1"] = out["I1"] - out["J"]
    out["bianchi2"] = out["J1"] + out["K3"] + out["K"] * out["I"]
    out["T"] = (out["I2"] + out["J3"]) / 3
    if not second:
        return out
    fK3 = lambda zz: D(fK, 3, zz)
    fI2 = lambda zz: D(fI, 2, zz)
    fJ3 = lambda zz: D(fJ, 3, zz)
    out["K31"] = D(fK3, 1, z, h2)[0]
    out["I23"] = D(fI2, 3, z, h2)[0]
    out["J33"] = D(fJ3, 3, z, h2)[0]
    out["rho1"] = out["K31"] - 3 * out["K2"]
    out["rho2"] = out["I23"] + out["J33"] + 2 * out["I"] * (out["I2"] + out["J3"]) + 6 * out["J"]

    def fa(zz):
        I, Jv = fI(zz), fJ(zz)
        T = (D(fI, 2, zz) + D(fJ, 3, zz)) / 3
        return -(I + 1j * Jv) / (T + 1j)

    a = -(out["I"] + 1j * out["J"]) / (out["T"] + 1j)
    a2 = D(fa, 2, z, h2)[0] - 1j * a * out["I"]
    a3 = D(fa, 3, z, h2)[0] - 1j * a * out["J"]
    out["a"] = a
    out["b"] = (a3 - 1j * a2) / 2 - a * a * out["T"]
    out["p"], out["q"] = (float(u) for u in conserved_pq(out["T"], a, out["b"]))
    out["W"] = out["p"] ** 2 + out["q"] ** 2
    return out
