"""Scalar invariants, identities and residuals built on the canonical coframe.

Frame derivatives follow the convention df = f_1 omega1 + f_2 omega2 + f_3 omega3,
with repeated subscripts nesting left to right: K_31 = (K_3)_1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import jets as J
from ..errors import NotFlat
from ..finsler import FinslerNorm
from .cartan import ORDER_FOR, CoframeJets, TwoForm, coframe_jets, pair
from .charts import Chart, SigmaPoint

TOL1, TOL2, TOL3 = 1e-8, 1e-5, 1e-3


def conserved_pq(T, a, b):
    """The functions p, q of (T, a, b) whose combinations W and w are constant."""
    T, a, b = (np.asarray(u) for u in (T, a, b))
    aa = np.abs(a) ** 2
    den = 1 + T * T
    p = (np.abs(b) ** 2 + aa - aa * aa / 9 - 9 / 16 * T * T - 27 / 16) / den
    q = ((2 / 3) * (b * np.conj(a) ** 2).real + aa * T - 9 / 8 * T) / den
    return p, q


def conserved_W(T, a, b):
    p, q = conserved_pq(T, a, b)
    return p * p + q * q


def conserved_w(T, a, b):
    p, q = conserved_pq(T, a, b)
    return (p + 1j * q) ** 3 * (1 - 1j * T) / (1 + 1j * T)


def a_from_IJT(I, J_, T):
    return -(I + 1j * J_) / (T + 1j)


@dataclass(frozen=True)
class Invariants:
    I: float
    J: float
    K: float
    I1: float
    I2: float
    I3: float
    J1: float
    J2: float
    J3: float
    K1: float
    K2: float
    K3: float
    T: float
    a: complex
    b: complex
    p: float
    q: float
    W: float
    w: complex
    rho: np.ndarray  # components of -omega1 + I omega2 + J omega3 in the chart basis
    zeta: np.ndarray  # components of omega3 + i omega2
    Kdual: float
    residuals: dict = field(default_factory=dict)

    def report(self) -> dict:
        """JSON-ready summary in the invariant report layout."""
        c = lambda z: [float(np.real(z)), float(np.imag(z))]
        res = self.residuals
        return {
            "I": self.I, "J": self.J, "K": self.K, "T": self.T,
            "a": c(self.a), "b": c(self.b), "p": self.p, "q": self.q,
            "W": self.W, "w": c(self.w),
            "residuals": {"bianchi": [res["bianchi1"], res["bianchi2"]],
                          "flatness": [res["rho1"], res["rho2"]]},
        }


def _structure_fields(cj: CoframeJets) -> dict:
    """Every derived quantity as a jet (order 0 at least when cj.order = 6)."""
    d = cj.deriv
    I, Jv, K = cj.I, cj.J, cj.K
    out = {"I": I, "J": Jv, "K": K}
    for name, f in (("I", I), ("J", Jv), ("K", K)):
        for a in (1, 2, 3):
            out[f"{name}{a}"] = d(f, a)
    out["K31"] = d(out["K3"], 1)
    out["I23"] = d(out["I2"], 3)
    out["J33"] = d(out["J3"], 3)
    T = (out["I2"] + out["J3"]) / 3.0
    a = -(I + 1j * Jv) / (T + 1j)
    out["T"], out["a"] = T, a
    out["T1"] = d(T, 1)
    out["T_eq"] = [d(T, 2) - 2 * (Jv * T - I), d(T, 3) + 2 * (I * T + Jv)]
    # rho(X_k) = (-1, I, J)_k; da - i a rho split along omega1, zeta and its conjugate
    alpha = [d(a, 1) + 1j * a, d(a, 2) - 1j * a * I, d(a, 3) - 1j * a * Jv]
    out["a_omega1"] = alpha[0]
    out["b"] = (alpha[2] - 1j * alpha[1]) * 0.5 - a * a * T
    out["a_zetabar"] = (alpha[2] + 1j * alpha[1]) * 0.5 + 1.5 * T
    w1, w2, w3 = cj.omega
    rho = -w1 + w2 * J.expand_dims(I) + w3 * J.expand_dims(Jv)
    X = cj.frame
    out["Kdual_rho"] = TwoForm(rho)(X[1], X[2])
    out["rho"], out["zeta"] = rho, w3 + 1j * w2
    return out


def _as_array(x):
    return np.asarray(J.value(x))


def invariant_fields(N: FinslerNorm, chart: Chart, z) -> dict:
    """All invariants and residuals as arrays over the batch of chart points z (n, 3)."""
    cj = coframe_jets(N, chart, z, ORDER_FOR["second"])
    f = _structure_fields(cj)
    g = {k: _as_array(v) for k, v in f.items() if not isinstance(v, list)}
    for k in ("T_eq",):
        g[k] = np.max([np.abs(_as_array(r)) for r in f[k]], axis=0)
    I, Jv, K, T, a, b = g["I"], g["J"], g["K"], g["T"], g["a"], g["b"]
    g["p"], g["q"] = conserved_pq(T, a, b)
    g["W"] = g["p"] ** 2 + g["q"] ** 2
    g["w"] = conserved_w(T, a, b)
    g["Kdual_formula"] = 1 - g["I3"] + g["J2"] - I ** 2 - Jv ** 2
    g["Kdual_complex"] = 1 + 2 * I ** 2 + 2 * Jv ** 2 - 3 * T ** 2
    g["bianchi1"] = g["I1"] - Jv
    g["bianchi2"] = g["J1"] + g["K3"] + K * I
    g["rho1"] = g["K31"] - 3 * g["K2"]
    g["rho2"] = g["I23"] + g["J33"] + 2 * I * (g["I2"] + g["J3"]) + 6 * Jv
    g["Mbar"] = -g["rho1"] / 3
    g["Lbar"] = -g["rho2"] / 3
    g["identity_T"] = g["I3"] - g["J2"] - 3 * (T ** 2 - I ** 2 - Jv ** 2)
    g["structure"] = np.max([np.abs(_as_array(r)) for r in cj.checks["d1"] + cj.checks["d2"]]
                            + [np.abs(_as_array(cj.checks["d3_13"]))], axis=0)
    return g


def _invariants_from(g: dict, i: int) -> Invariants:
    s = lambda k: float(np.real(g[k][i]))
    residuals = {k: s(k) for k in ("bianchi1", "bianchi2", "rho1", "rho2", "Lbar", "Mbar",
                                   "identity_T", "T1", "T_eq", "structure")}
    residuals["Kdual_formula"] = s("Kdual_formula")
    residuals["Kdual_complex"] = s("Kdual_complex")
    residuals["a_omega1"] = complex(g["a_omega1"][i])
    residuals["a_zetabar"] = complex(g["a_zetabar"][i])
    return Invariants(
        I=s("I"), J=s("J"), K=s("K"),
        I1=s("I1"), I2=s("I2"), I3=s("I3"), J1=s("J1"), J2=s("J2"), J3=s("J3"),
        K1=s("K1"), K2=s("K2"), K3=s("K3"),
        T=s("T"), a=complex(g["a"][i]), b=complex(g["b"][i]),
        p=s("p"), q=s("q"), W=s("W"), w=complex(g["w"][i]),
        rho=np.real(g["rho"][i]), zeta=np.asarray(g["zeta"][i]),
        Kdual=s("Kdual_rho"), residuals=residuals,
    )


def invariants_batch(N: FinslerNorm, points: list[SigmaPoint]) -> list[Invariants]:
    """invariants_at for many points, vectorized per chart."""
    out: list[Invariants | None] = [None] * len(points)
    by_chart: dict[int, list[int]] = {}
    for i, pt in enumerate(points):
        by_chart.setdefault(pt.chart.index, []).append(i)
    for idx, members in by_chart.items():
        z = np.array([points[i].z for i in members])
        g = invariant_fields(N, Chart(idx), z)
        for j, i in enumerate(members):
            out[i] = _invariants_from(g, j)
    return out


def invariants_at(N: FinslerNorm, pt: SigmaPoint) -> Invariants:
    return invariants_batch(N, [pt])[0]


def curvature_batch(N: FinslerNorm, chart: Chart, z) -> np.ndarray:
    """K alone, on the cheapest jets that determine it."""
    return _as_array(coframe_jets(N, chart, z, ORDER_FOR["curvature"]).K)


def bianchi_residuals(N: FinslerNorm, pt: SigmaPoint) -> tuple[float, float]:
    r = invariants_at(N, pt).residuals
    return r["bianchi1"], r["bianchi2"]


def flatness_residuals(N: FinslerNorm, pt: SigmaPoint) -> tuple[float, float, float, float]:
    """(K_31 - 3 K_2, I_23 + J_33 + 2 I (I_2 + J_3) + 6 J, Lbar, Mbar)."""
    r = invariants_at(N, pt).residuals
    return r["rho1"], r["rho2"], r["Lbar"], r["Mbar"]


@dataclass(frozen=True, eq=False)
class ConnectionMatrix:
    """The sl(3)-valued connection form at a point.

    ``forms[i, j]`` holds the components of phi^i_j in the (dx1, dx2, dtheta)
    basis; ``on_frame[a]`` is the matrix phi(X_{a+1}).
    """

    forms: np.ndarray  # (3, 3, 3)
    on_frame: np.ndarray  # (3, 3, 3)
    maurer_cartan_residual: float

    def __call__(self, X) -> np.ndarray:
        return self.forms @ np.asarray(X)


def phi_matrix(w1, w2, w3, I, Jv, T):
    """Entries of the connection form as a nested list (works on jets and arrays)."""
    e = J.expand_dims
    diag = (w3 * e(I) - w2 * e(Jv)) * (1 / 3)
    return [[diag, -w1, -w2 + w3 * e(T)],
            [w1, diag, -w3 - w2 * e(T)],
            [w2, w3, diag * -2.0]]


def _connection_jets(N, pt):
    cj = coframe_jets(N, pt.chart, pt.z[None, :], ORDER_FOR["second"])
    T = (cj.deriv(cj.I, 2) + cj.deriv(cj.J, 3)) / 3.0
    return cj, phi_matrix(*cj.omega, cj.I, cj.J, T)


def connection_section(N: FinslerNorm, pt: SigmaPoint, check_flat: bool = True) -> ConnectionMatrix:
    if check_flat:
        rho1, rho2, _, _ = flatness_residuals(N, pt)
        if max(abs(rho1), abs(rho2)) > 10 * TOL3:
            raise NotFlat(f"flatness residuals ({rho1:.3g}, {rho2:.3g}) too large")
    cj, phi = _connection_jets(N, pt)
    X = cj.frame
    worst = 0.0
    for i in range(3):
        for j in range(3):
            for a in range(3):
                for b in range(a + 1, 3):
                    dphi = TwoForm(phi[i][j])(X[a], X[b])
                    wedge = 0.0
                    for k in range(3):
                        wedge = wedge + (pair(phi[i][k], X[a]) * pair(phi[k][j], X[b])
                                         - pair(phi[i][k], X[b]) * pair(phi[k][j], X[a]))
                    worst = max(worst, float(np.abs(_as_array(dphi + wedge)).max()))
    forms = np.array([[_as_array(phi[i][j])[0] for j in range(3)] for i in range(3)])
    frame = np.array([_as_array(x)[0] for x in X])
    on_frame = np.einsum("ijc,ac->aij", forms, frame)
    return ConnectionMatrix(forms, on_frame, worst)
