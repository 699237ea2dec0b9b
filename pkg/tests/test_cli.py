import hashlib
import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conicfinsler import io
from conicfinsler.cli import run
from conicfinsler.conics import ConicQuadric
from conicfinsler.errors import GeometryError
from conicfinsler.projmodel import random_sl3


def call(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


def digest(directory):
    return {p.name: hashlib.sha256(p.read_bytes()).hexdigest() for p in sorted(directory.iterdir())}


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_floats_round_trip_through_text(x):
    assert float(io.fmt(x)) == x


def test_json_layout_is_stable():
    text = io.dumps({"a": 0.1, "b": [1, 2.5], "c": {"d": True, "e": None}, "f": complex(1, -2)})
    assert json.loads(text) == {"a": 0.1, "b": [1, 2.5], "c": {"d": True, "e": None}, "f": [1, -2]}
    assert "0.10000000000000001" in text


def test_csv_has_header_and_lf(tmp_path):
    path = io.atomic_write(tmp_path / "x.csv", io.csv_text(["a", "b"], [[1, 0.5], [2, 1e-20]]))
    raw = path.read_bytes()
    assert raw.startswith(b"a,b\n") and b"\r" not in raw
    assert raw.count(b"\n") == 3
    assert [p.name for p in tmp_path.iterdir()] == ["x.csv"]


def test_conic_parsing(tmp_path):
    Q = io.load_conic('{"type":"pq","p":0.3,"q":0.1}')
    assert np.allclose(Q.matrix, ConicQuadric.normal_form(0.3, 0.1).matrix)
    f = tmp_path / "c.json"
    f.write_text(json.dumps({"type": "matrix", "re": np.eye(3).tolist(), "im": np.zeros((3, 3)).tolist()}))
    assert np.allclose(io.load_conic(str(f)).matrix, np.eye(3))
    with pytest.raises(GeometryError):
        io.load_conic('{"type":"cubic"}')
    with pytest.raises(GeometryError):
        io.load_conic("{not json")


def test_normalize_examples(capsys):
    m = np.diag(np.exp(1j * np.array([0.3, 0.1, -0.3])))
    source = json.dumps({"type": "matrix", "re": m.real.tolist(), "im": m.imag.tolist()})
    code, out = call(capsys, "normalize", "--conic", source)
    assert code == 0
    assert (out["p"], out["q"]) == pytest.approx((0.3, 0.1), abs=1e-12)
    assert out["had_real_points"] is False
    code, out = call(capsys, "normalize", "--conic", '{"type":"matrix","re":[[1,0,0],[0,1,0],[0,0,-1]]}')
    assert code == 2 and out == {"had_real_points": True}


def test_normalize_round_trip(capsys):
    g = random_sl3(np.random.default_rng(8)).m
    m = g.T @ ConicQuadric.normal_form(0.4, 0.2).matrix @ g
    source = json.dumps({"type": "matrix", "re": m.real.tolist(), "im": m.imag.tolist()})
    code, out = call(capsys, "normalize", "--conic", source)
    assert code == 0 and (out["p"], out["q"]) == pytest.approx((0.4, 0.2), abs=1e-9)


def test_invalid_input_exit_codes(capsys, tmp_path):
    assert run(["eval", "--conic", '{"type":"pq","p":0.3}']) == 2
    assert run(["eval", "--p", "0.3", "--q", "0.1", "--v", "0,0,0", "--w", "1,0,0"]) == 2
    assert run(["verify", "--tol-override", "nonsense=1"]) == 2
    assert run(["eval", "--conic", str(tmp_path / "missing.json")]) == 3
    capsys.readouterr()


def test_io_error_exit_code(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert run(["indicatrix", "--p", "0.4", "--q", "0.2", "--out", str(blocker / "sub")]) == 3
    capsys.readouterr()


def test_eval_pair(capsys):
    code, out = call(capsys, "eval", "--p", "0.3", "--q", "0.1", "--v", "1,1,0", "--w", "1,-1,0")
    assert code == 0
    assert out["F"] - out["F_reverse"] == pytest.approx(2 * np.tan(0.1), abs=1e-9)


def test_indicatrix_emit(capsys, tmp_path):
    code, out = call(capsys, "indicatrix", "--p", "0.4", "--q", "0.2", "--samples", "256", "--out", str(tmp_path))
    assert code == 0 and out["winding"] == 1
    lines = (tmp_path / "indicatrix.csv").read_text().splitlines()
    assert lines[0] == "theta,w1,w2,w3,c1,c2" and len(lines) == 257


def test_geodesic_emit_closes(capsys, tmp_path):
    code, out = call(capsys, "geodesic", "--p", "0.3", "--q", "0.1", "--v", "0.2,1,0.4", "--w", "1,0,-0.3",
                     "--out", str(tmp_path))
    assert code == 0
    rows = np.loadtxt(tmp_path / "geodesic.csv", delimiter=",", skiprows=1)
    assert rows.shape[1] == 5
    assert abs(rows[-1, 0] - 2 * np.pi) < 1e-12
    assert rows[0, 3] == rows[-1, 3]
    assert np.abs(rows[0, 1:3] - rows[-1, 1:3]).max() < 1e-8


def test_leaf_emit_conserves_w(capsys, tmp_path):
    code, out = call(capsys, "leaf", "--p", "0.3", "--q", "0.1", "--time", "10", "--out", str(tmp_path))
    assert code == 0
    header = (tmp_path / "leaf.csv").read_text().splitlines()[0].split(",")
    assert len(header) == 18 and header[0] == "t"
    data = np.loadtxt(tmp_path / "leaf.csv", delimiter=",", skiprows=1)
    assert data[-1, 0] == pytest.approx(10.0, abs=1e-12)
    assert np.ptp(data[:, header.index("W")]) < 1e-7


def test_grids(capsys, tmp_path):
    code, out = call(capsys, "curvature", "--p", "0.2", "--q", "0", "--grid", "3", "--out", str(tmp_path))
    assert code == 0 and out["points"] == 27 and out["max_abs_K_minus_1"] < 1e-5
    code, out = call(capsys, "invariants", "--p", "0.6", "--q", "0.4", "--grid", "3", "--out", str(tmp_path))
    assert code == 0 and out["W_spread"] < 1e-4 and out["flatness"] < 1e-3
    assert len((tmp_path / "invariants.csv").read_text().splitlines()) == 28


def test_crofton_command(capsys):
    code, out = call(capsys, "crofton", "--p", "0.3", "--q", "0.1", "--samples", "20000", "--seed", "2")
    assert code == 0 and out["rel_err"] < 5 * out["std_err"] / out["lhs"] + 1e-3


@pytest.mark.parametrize("pq", [("0", "0"), ("0.3", "0.1")])
def test_verify_passes(capsys, pq):
    code, out = call(capsys, "verify", "--p", pq[0], "--q", pq[1])
    assert code == 0 and out["passed"] and out["failed"] == []
    for name in ("curvature", "bianchi", "flatness", "conservation", "closure", "jacobi", "symmetry"):
        assert name in out["checks"]


def test_verify_flags_a_perturbed_norm(capsys):
    code, out = call(capsys, "verify", "--p", "0.3", "--q", "0.1", "--perturb", "1e-3")
    assert code == 1
    assert out["checks"]["flatness"]["passed"] is False
    assert out["checks"]["flatness"]["residual"] > 10 * out["checks"]["flatness"]["tol"]


def test_tolerance_override_can_fail_a_check(capsys):
    code, out = call(capsys, "verify", "--p", "0.3", "--q", "0.1", "--samples", "5", "--grid", "1",
                     "--tol-override", "curvature=1e-30")
    assert code == 1 and out["failed"] == ["curvature"]


def test_config_precedence(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"conic": {"type": "pq", "p": 0.6, "q": 0.4}, "samples": 128}))
    code, out = call(capsys, "indicatrix", "--config", str(cfg))
    assert out["samples"] == 128
    code, out = call(capsys, "indicatrix", "--config", str(cfg), "--samples", "64")
    assert out["samples"] == 64
    # F(e1, e3) = cos p on the normal form
    code, a = call(capsys, "eval", "--config", str(cfg), "--v", "1,0,0", "--w", "0,0,1")
    assert a["F"] == pytest.approx(np.cos(0.6), abs=1e-14)
    code, b = call(capsys, "eval", "--config", str(cfg), "--p", "0.3", "--q", "0.1", "--v", "1,0,0", "--w", "0,0,1")
    assert b["F"] == pytest.approx(np.cos(0.3), abs=1e-14)
    cfg.write_text(json.dumps({"colour": "red"}))
    assert run(["eval", "--config", str(cfg)]) == 2
    capsys.readouterr()


def test_outputs_are_byte_deterministic(capsys, tmp_path):
    for name in ("a", "b"):
        d = tmp_path / name
        for cmd in (["eval", "--samples", "50", "--seed", "4"], ["indicatrix"], ["geodesic"],
                    ["invariants", "--grid", "2"], ["leaf", "--time", "1"]):
            assert run([*cmd, "--p", "0.3", "--q", "0.1", "--out", str(d)]) == 0
    capsys.readouterr()
    assert digest(tmp_path / "a") == digest(tmp_path / "b")
    assert len(digest(tmp_path / "a")) == 5
