"""Command-line front end: conic ingestion, batch evaluation, checks and CSV/JSON emission.

Every subcommand prints a JSON summary on stdout.  With ``--out DIR`` it also
writes its data files there (each via temp file and rename).  Exit codes:
0 success, 1 a verification check failed, 2 invalid input, 3 IO error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import io
from .conics import ConicQuadric, normalize_conic
from .errors import GeometryError, HasRealPoints
from .finsler import (FinslerNorm, PerturbedNorm, antipodal_check, indicatrix_sample, quartic_fit,
                      random_tangent_pairs, root_oracle)
from .projmodel import ray_normalize
from .coframe.charts import Chart, random_sigma_points, sigma_point
from .coframe.invariants import curvature_batch, invariant_fields, invariants_at, invariants_batch
from .flows.crofton import crofton_check, small_circle
from .flows.geodesics import closure_residual, collinearity_residual, geodesic_line
from .flows.jacobi import jacobi_conjugate, jacobi_trace
from .flows.leaf import ControlPath, LeafState, leaf_integrate

EXIT_OK, EXIT_FAILED, EXIT_INPUT, EXIT_IO = 0, 1, 2, 3

DEFAULT_TOLERANCES = {
    "norm": 1e-11,
    "curvature": 1e-5,
    "bianchi": 1e-5,
    "flatness": 1e-3,
    "structure": 1e-4,
    "conservation": 1e-4,
    "closure": 1e-8,
    "collinearity": 1e-9,
    "unit_speed": 1e-9,
    "jacobi": 1e-5,
    "symmetry": 1e-12,
}

DEFAULTS = {
    "conic": None, "p": 0.0, "q": 0.0, "seed": 0, "out": None, "tol": {},
    "grid": None, "samples": None,
    "v": [1.0, 0.0, 0.0], "w": [0.0, 1.0, 0.0], "base": [1.0, 0.0, 0.0],
    "time": 10.0, "step": 0.01, "controls": [1.0, 0.3, -0.2],
    "point": [0.2, -0.1, 0.4], "perturb": None,
    "center": [0.2, 0.3, 1.0], "radius": 0.7,
}

# per-command defaults for --grid and --samples
SIZES = {
    "eval": (None, 1000), "indicatrix": (None, 256), "geodesic": (None, 1025),
    "curvature": (6, None), "invariants": (4, None), "leaf": (None, None),
    "crofton": (None, 100_000), "verify": (3, 20), "normalize": (None, None),
}


class UsageError(GeometryError):
    """Malformed command-line or configuration value."""


def _vector(text) -> list[float]:
    if isinstance(text, (list, tuple)):
        vals = [float(x) for x in text]
    else:
        vals = [float(x) for x in str(text).split(",")]
    return vals


def _tol_pair(text: str) -> tuple[str, float]:
    key, sep, val = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected k=v, got {text!r}")
    try:
        return key.strip(), float(val)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad tolerance value in {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--conic", help="conic JSON file or inline JSON ({\"type\":\"pq\",...} or matrix)")
    common.add_argument("--p", type=float, help="normal-form parameter p")
    common.add_argument("--q", type=float, help="normal-form parameter q")
    common.add_argument("--grid", type=int, help="grid resolution (per axis) or number of geodesics")
    common.add_argument("--samples", type=int, help="number of samples")
    common.add_argument("--seed", type=int, help="random seed")
    common.add_argument("--out", help="directory for data files")
    common.add_argument("--config", help="JSON config file; flags take precedence")
    common.add_argument("--tol-override", action="append", type=_tol_pair, default=[],
                        metavar="K=V", dest="tol_override", help="override a named tolerance")

    parser = argparse.ArgumentParser(prog="conicfinsler", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("normalize", parents=[common], help="reduce a conic to its (p, q) normal form")
    ev = sub.add_parser("eval", parents=[common], help="evaluate the norm")
    ev.add_argument("--v", help="base vector v1,v2,v3")
    ev.add_argument("--w", help="direction w1,w2,w3")
    ind = sub.add_parser("indicatrix", parents=[common], help="sample the unit curve at a point")
    ind.add_argument("--base", help="base ray b1,b2,b3")
    geo = sub.add_parser("geodesic", parents=[common], help="trace a closed geodesic")
    geo.add_argument("--v", help="start point v1,v2,v3")
    geo.add_argument("--w", help="initial direction w1,w2,w3")
    sub.add_parser("curvature", parents=[common], help="curvature on a chart grid")
    sub.add_parser("invariants", parents=[common], help="invariants on a chart grid")
    lf = sub.add_parser("leaf", parents=[common], help="integrate the leaf system")
    lf.add_argument("--time", type=float, help="integration time")
    lf.add_argument("--step", type=float, help="RK4 step")
    lf.add_argument("--controls", help="frame coefficients u1,u2,u3")
    lf.add_argument("--point", help="seed point x1,x2,theta in chart +z")
    cr = sub.add_parser("crofton", parents=[common], help="Monte-Carlo Crofton check on a small circle")
    cr.add_argument("--center", help="circle centre c1,c2,c3")
    cr.add_argument("--radius", type=float, help="angular radius")
    ver = sub.add_parser("verify", parents=[common], help="run the verification checks")
    ver.add_argument("--perturb", type=float, metavar="EPS",
                     help="test hook: verify a bump-perturbed norm instead (expected to fail)")
    return parser


def resolve_config(args: argparse.Namespace) -> dict:
    """defaults < config file < flags."""
    cfg = dict(DEFAULTS)
    grid, samples = SIZES[args.command]
    cfg["grid"], cfg["samples"] = grid, samples
    file_cfg = io.load_config(args.config)
    unknown = set(file_cfg) - set(DEFAULTS)
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    cfg.update(file_cfg)
    if args.p is not None or args.q is not None:
        cfg["conic"] = None
    flags = {k: v for k, v in vars(args).items()
             if v is not None and k in DEFAULTS and k != "tol"}
    cfg.update(flags)
    tol = dict(DEFAULT_TOLERANCES)
    tol.update(file_cfg.get("tol", {}))
    tol.update(dict(args.tol_override))
    unknown = set(tol) - set(DEFAULT_TOLERANCES)
    if unknown:
        raise UsageError(f"unknown tolerance names: {sorted(unknown)}")
    cfg["tol"] = tol
    for key in ("v", "w", "base", "controls", "point", "center"):
        cfg[key] = _vector(cfg[key])
    for key in ("grid", "samples"):
        if cfg[key] is not None and cfg[key] < 1:
            raise UsageError(f"--{key} must be positive")
    return cfg


def conic_from(cfg: dict) -> ConicQuadric:
    source = cfg["conic"]
    if source is None:
        return ConicQuadric.normal_form(float(cfg["p"]), float(cfg["q"]))
    if isinstance(source, dict):
        return io.parse_conic(source)
    return io.load_conic(str(source))


def norm_from(cfg: dict) -> FinslerNorm:
    return FinslerNorm.from_quadric(conic_from(cfg))


class Outputs:
    """Collects data files; writes them only once the command has succeeded."""

    def __init__(self, out: str | None):
        self.out = Path(out) if out else None
        self.files: dict[str, str] = {}

    def add(self, name: str, text: str):
        self.files[name] = text

    def flush(self):
        if self.out is None:
            return
        for name, text in self.files.items():
            io.atomic_write(self.out / name, text)


def _chart_grid(n: int) -> np.ndarray:
    """An n^3 grid of (x1, x2, theta) in chart +z."""
    xs = np.linspace(-1.0, 1.0, n)
    th = 2 * np.pi * np.arange(n) / n
    X1, X2, TH = np.meshgrid(xs, xs, th, indexing="ij")
    return np.column_stack([X1.ravel(), X2.ravel(), TH.ravel()])


def _spread(x) -> float:
    x = np.asarray(x)
    return float(np.abs(x - x[0]).max() / max(np.abs(x).mean(), 1e-300))


def cmd_normalize(cfg, outputs):
    try:
        nc = normalize_conic(conic_from(cfg))
    except HasRealPoints:
        return {"had_real_points": True}, EXIT_INPUT
    report = {"p": nc.p, "q": nc.q, "frame": nc.frame.m.tolist(),
              "scale": [nc.scale.real, nc.scale.imag], "residual": nc.residual(),
              "had_real_points": False}
    outputs.add("normalize.json", io.dumps(report) + "\n")
    return report, EXIT_OK


def cmd_eval(cfg, outputs, explicit_pair: bool):
    N = norm_from(cfg)
    if explicit_pair:
        v, w = np.array(cfg["v"]), np.array(cfg["w"])
        F = float(N.value(v, w))
        report = {"F": F, "F_reverse": float(N.value(v, -w)), "oracle": float(root_oracle(N, v, w))}
        outputs.add("eval.json", io.dumps(report) + "\n")
        return report, EXIT_OK
    v, w = random_tangent_pairs(np.random.default_rng(cfg["seed"]), cfg["samples"])
    F = N.value(v, w)
    oracle = root_oracle(N, v, w)
    rows = np.column_stack([v, w, F, oracle, np.abs(F - oracle)])
    outputs.add("eval.csv", io.csv_text(["v1", "v2", "v3", "w1", "w2", "w3", "F", "oracle", "abs_diff"], rows))
    return {"samples": cfg["samples"], "max_abs_diff": float(np.abs(F - oracle).max())}, EXIT_OK


def cmd_indicatrix(cfg, outputs):
    N = norm_from(cfg)
    curve = indicatrix_sample(N, ray_normalize(cfg["base"]), cfg["samples"])
    rows = np.column_stack([curve.theta, curve.samples, curve.coords])
    outputs.add("indicatrix.csv", io.csv_text(["theta", "w1", "w2", "w3", "c1", "c2"], rows))
    ang = np.unwrap(np.arctan2(curve.coords[:, 1], curve.coords[:, 0]))
    step = ang[0] + 2 * np.pi - ang[-1]
    winding = int(round((ang[-1] - ang[0] + step) / (2 * np.pi)))
    report = {"samples": len(curve), "winding": winding}
    if len(curve) >= 64:
        deg4, deg2 = quartic_fit(curve)
        report.update(deg4_residual=deg4, deg2_residual=deg2)
    return report, EXIT_OK


def cmd_geodesic(cfg, outputs):
    N = norm_from(cfg)
    trace = geodesic_line(N, cfg["v"], cfg["w"], n=cfg["samples"])
    outputs.add("geodesic.csv", io.csv_text(["s", "x1", "x2", "chart", "unit_residual"], trace.chart_rows()))
    return {"samples": len(trace), "total_length": trace.total_length,
            "closure": closure_residual(trace), "collinearity": collinearity_residual(trace),
            "unit_residual": float(trace.unit_residual.max())}, EXIT_OK


def cmd_curvature(cfg, outputs):
    N = norm_from(cfg)
    z = _chart_grid(cfg["grid"])
    K = curvature_batch(N, Chart(0), z)
    outputs.add("curvature.csv", io.csv_text(["chart", "x1", "x2", "theta", "K"],
                                             [[0, *zk, k] for zk, k in zip(z, K)]))
    return {"points": len(z), "max_abs_K_minus_1": float(np.abs(K - 1).max())}, EXIT_OK


INVARIANT_COLUMNS = ["chart", "x1", "x2", "theta", "I", "J", "K", "T", "a_re", "a_im", "b_re", "b_im",
                     "p", "q", "W", "w_re", "w_im", "bianchi1", "bianchi2", "rho1", "rho2"]


def cmd_invariants(cfg, outputs):
    N = norm_from(cfg)
    z = _chart_grid(cfg["grid"])
    g = invariant_fields(N, Chart(0), z)
    r = lambda k: np.real(g[k])
    cols = [np.zeros(len(z)), z[:, 0], z[:, 1], z[:, 2], r("I"), r("J"), r("K"), r("T"),
            g["a"].real, g["a"].imag, g["b"].real, g["b"].imag, r("p"), r("q"), r("W"),
            g["w"].real, g["w"].imag, r("bianchi1"), r("bianchi2"), r("rho1"), r("rho2")]
    rows = np.column_stack(cols)
    outputs.add("invariants.csv", io.csv_text(INVARIANT_COLUMNS, [[int(row[0]), *row[1:]] for row in rows]))
    mx = lambda k: float(np.abs(g[k]).max())
    return {"points": len(z), "max_abs_K_minus_1": float(np.abs(r("K") - 1).max()),
            "bianchi": max(mx("bianchi1"), mx("bianchi2")), "flatness": max(mx("rho1"), mx("rho2")),
            "W_mean": float(r("W").mean()), "W_spread": _spread(r("W")), "w_spread": _spread(g["w"])}, EXIT_OK


LEAF_COLUMNS = ["t", *[f"g{i}{j}" for i in range(1, 4) for j in range(1, 4)],
                "T", "a_re", "a_im", "b_re", "b_im", "W", "w_re", "w_im"]


def cmd_leaf(cfg, outputs):
    N = norm_from(cfg)
    x1, x2, theta = cfg["point"]
    inv = invariants_at(N, sigma_point(N, Chart(0), x1, x2, theta))
    state0 = LeafState(np.eye(3), inv.T, inv.a, inv.b)
    traj = leaf_integrate(state0, ControlPath.single(cfg["controls"], float(cfg["time"])), float(cfg["step"]))
    outputs.add("leaf.csv", io.csv_text(LEAF_COLUMNS, traj.rows()))
    W, w = traj.conserved()
    return {"steps": len(traj.t) - 1, "time": float(traj.t[-1]), "W_spread": float(np.ptp(W)),
            "w_spread": float(np.abs(w - w[0]).max()), "error_estimate": traj.error_estimate}, EXIT_OK


def cmd_crofton(cfg, outputs):
    N = norm_from(cfg)
    rep = crofton_check(N, small_circle(cfg["center"], float(cfg["radius"])), cfg["samples"], cfg["seed"])
    report = {"lhs": rep.lhs, "rhs": rep.rhs, "rel_err": rep.rel_err, "rhs_minus": rep.rhs_minus,
              "std_err": rep.std_err, "samples": rep.samples}
    outputs.add("crofton.json", io.dumps(report) + "\n")
    return report, EXIT_OK


def verify_checks(N: FinslerNorm, n_points: int, n_geodesics: int, seed: int) -> dict[str, float]:
    """Every residual of the verification suite, keyed by tolerance name."""
    rng = np.random.default_rng(seed)
    inv = invariants_batch(N, random_sigma_points(N, rng, n_points))
    res = lambda k: np.array([abs(x.residuals[k]) for x in inv])
    W = np.array([x.W for x in inv])
    w = np.array([x.w for x in inv])
    out = {
        "curvature": float(max(abs(x.K - 1) for x in inv)),
        "bianchi": float(max(res("bianchi1").max(), res("bianchi2").max())),
        "flatness": float(max(res("rho1").max(), res("rho2").max())),
        "structure": float(max(res("identity_T").max(),
                               max(abs(x.Kdual - x.residuals["Kdual_complex"]) for x in inv))),
        "conservation": max(float(np.ptp(W) / abs(W.mean())), float(np.abs(w - w[0]).max() / abs(w).mean())),
    }
    closure = colin = unit = jac = 0.0
    for _ in range(n_geodesics):
        v, w0 = rng.standard_normal(3), rng.standard_normal(3)
        trace = geodesic_line(N, v, w0)
        closure = max(closure, closure_residual(trace))
        colin = max(colin, collinearity_residual(trace))
        unit = max(unit, float(trace.unit_residual.max()))
        jac = max(jac, abs(jacobi_conjugate(N, jacobi_trace(N, v, w0, n=801)) - np.pi))
    out.update(closure=closure, collinearity=colin, unit_speed=unit, jacobi=jac)
    v, w0 = rng.standard_normal((1000, 3)), rng.standard_normal((1000, 3))
    asym = N.value(v, w0) - N.value(v, -w0)
    A = np.einsum("ij,jk,ik->i", v, N.matrix, v)
    B = np.einsum("ij,jk,ik->i", v, N.matrix, w0)
    out["norm"] = float(np.abs(N.value(v, w0) - root_oracle(N, v, w0)).max())
    out["symmetry"] = max(float(np.abs(asym - 2 * (B / A).imag).max()), antipodal_check(N, 1000, seed))
    return out


def cmd_verify(cfg, outputs):
    N = norm_from(cfg)
    if cfg["perturb"] is not None:
        N = PerturbedNorm(N, float(cfg["perturb"]))
    values = verify_checks(N, cfg["samples"], cfg["grid"], cfg["seed"])
    tol = cfg["tol"]
    checks = {k: {"residual": values[k], "tol": tol[k], "passed": bool(values[k] < tol[k])}
              for k in DEFAULT_TOLERANCES}
    passed = all(c["passed"] for c in checks.values())
    report = {"p": N.conic.p, "q": N.conic.q, "perturbed": cfg["perturb"] is not None,
              "points": cfg["samples"], "geodesics": cfg["grid"], "seed": cfg["seed"],
              "checks": checks, "failed": [k for k, c in checks.items() if not c["passed"]],
              "passed": passed}
    outputs.add("verify.json", io.dumps(report) + "\n")
    return report, EXIT_OK if passed else EXIT_FAILED


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        outputs = Outputs(cfg["out"])
        cmd = args.command
        if cmd == "eval":
            report, code = cmd_eval(cfg, outputs, args.v is not None or args.w is not None)
        else:
            handler = {"normalize": cmd_normalize, "indicatrix": cmd_indicatrix, "geodesic": cmd_geodesic,
                       "curvature": cmd_curvature, "invariants": cmd_invariants, "leaf": cmd_leaf,
                       "crofton": cmd_crofton, "verify": cmd_verify}[cmd]
            report, code = handler(cfg, outputs)
        outputs.flush()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (GeometryError, ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    sys.stdout.write(io.dumps(report) + "\n")
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
