import numpy as np
import pytest
from hypothesis import given, strategies as st

from conicfinsler.conics import (ConicQuadric, NormalizedConic, has_real_points, line_conic_intersect,
                                 normalize_conic, stabilizer_check, unit_speed_basis)
from conicfinsler.errors import DegenerateConic, DegenerateSpan, GeometryError, HasRealPoints, TangentLine
from conicfinsler.projmodel import random_sl3

E = np.eye(3)


def real(m):
    return ConicQuadric(np.asarray(m, dtype=float), np.zeros((3, 3)))


def test_quadric_validation():
    with pytest.raises(GeometryError):
        ConicQuadric(np.triu(np.ones((3, 3))), np.zeros((3, 3)))
    with pytest.raises(DegenerateConic):
        real(np.diag([1.0, 1.0, 0.0]))
    with pytest.raises(GeometryError):
        ConicQuadric(np.eye(2), np.zeros((2, 2)))


@pytest.mark.parametrize("Q, expected", [
    (real(np.eye(3)), False),
    (real(np.diag([1.0, 1.0, -1.0])), True),
    (ConicQuadric.normal_form(0.3, 0.1), False),
])
def test_has_real_points_examples(Q, expected):
    assert has_real_points(Q) is expected


def test_real_indefinite_conic_is_rejected():
    with pytest.raises(HasRealPoints):
        normalize_conic(real(np.diag([1.0, 1.0, -1.0])))


def test_normal_form_is_a_fixed_point():
    nc = normalize_conic(ConicQuadric.normal_form(0.3, 0.1))
    assert (nc.p, nc.q) == pytest.approx((0.3, 0.1), abs=1e-12)
    assert nc.residual() < 1e-12


def test_real_definite_is_round(rng):
    a = rng.standard_normal((3, 3))
    nc = normalize_conic(real(a @ a.T + 0.5 * np.eye(3)))
    assert (nc.p, nc.q) == pytest.approx((0.0, 0.0), abs=1e-10)


def test_complex_rescaling_does_not_change_moduli():
    Q = ConicQuadric.normal_form(0.5, -0.2)
    nc = normalize_conic(ConicQuadric.from_complex(3.0 * np.exp(0.7j) * Q.matrix))
    assert (nc.p, nc.q) == pytest.approx((0.5, -0.2), abs=1e-11)


def test_ordering_of_input_exponents_is_irrelevant():
    # e^{-ip}, e^{ip}, e^{iq} in scrambled positions
    Q = ConicQuadric.from_complex(np.diag(np.exp(1j * np.array([-0.4, 0.2, 0.4]))))
    nc = normalize_conic(Q)
    assert (nc.p, nc.q) == pytest.approx((0.4, 0.2), abs=1e-11)


def test_congruence_round_trip(rng):
    base = ConicQuadric.normal_form(0.4, 0.2)
    for _ in range(25):
        g = random_sl3(rng)
        nc = normalize_conic(base.congruent(g))
        assert (nc.p, nc.q) == pytest.approx((0.4, 0.2), abs=1e-9)
        assert nc.residual() < 1e-9
        assert abs(np.linalg.det(nc.frame.m) - 1) < 1e-12


@given(st.floats(0.0, 1.4), st.floats(-1.0, 1.0), st.integers(0, 2 ** 31))
def test_round_trip_property(p, qfrac, seed):
    q = qfrac * p
    g = random_sl3(np.random.default_rng(seed), 0.7)
    nc = normalize_conic(ConicQuadric.normal_form(p, q).congruent(g))
    assert nc.p == pytest.approx(p, abs=1e-8)
    assert nc.q == pytest.approx(q, abs=1e-8)


def test_from_pq_range():
    with pytest.raises(GeometryError):
        NormalizedConic.from_pq(0.1, 0.3)
    with pytest.raises(GeometryError):
        NormalizedConic.from_pq(np.pi / 2, 0.0)


def test_round_roots_are_plus_minus_i():
    t = line_conic_intersect(real(np.eye(3)), E[0], E[1])
    assert t[0] == pytest.approx(1j) and t[1] == pytest.approx(-1j)


def test_normal_form_roots():
    p, q = 0.3, 0.1
    t = line_conic_intersect(ConicQuadric.normal_form(p, q), E[0], E[1])
    expected = np.exp(1j * (p - q + np.pi) / 2)
    assert t[0] == pytest.approx(expected, abs=1e-14)
    assert t[1] == pytest.approx(-expected, abs=1e-14)


def test_random_roots_solve_the_quadric(rng):
    for _ in range(50):
        g = random_sl3(rng)
        Q = ConicQuadric.normal_form(0.6, 0.4).congruent(g)
        v, w = rng.standard_normal(3), rng.standard_normal(3)
        for t in line_conic_intersect(Q, v, w):
            x = v + t * w
            assert abs(x @ Q.matrix @ x) < 1e-12 * np.linalg.norm(Q.matrix) * (x.conj() @ x).real


def test_intersect_errors():
    Q = real(np.eye(3))
    with pytest.raises(DegenerateSpan):
        line_conic_intersect(Q, E[0], 2 * E[0])
    # restricted to span(e1, e2) this form has rank one, so the line is tangent
    tangent = ConicQuadric.from_complex(np.array([[1, 1j, 1], [1j, -1, 0], [1, 0, 1]]))
    with pytest.raises(TangentLine):
        line_conic_intersect(tangent, E[0], E[1])


def test_near_infinity_flag():
    Q = ConicQuadric.from_complex(np.array([[0, 0, 1], [0, 1j, 0], [1, 0, 0]]))
    roots = line_conic_intersect(Q, E[0] + E[1], E[2])
    assert roots.near_infinity


def test_unit_speed_basis_examples():
    assert unit_speed_basis(real(np.eye(3)), E[0], E[1]) == pytest.approx((0.0, 1.0))
    a2, b2 = unit_speed_basis(ConicQuadric.normal_form(0.3, 0.1), E[0], E[1])
    assert b2 == pytest.approx(1 / np.cos(0.1), abs=1e-14)
    assert b2 == pytest.approx(1.0050209184004553, abs=1e-15)


def test_unit_speed_basis_residual(rng):
    for _ in range(200):
        Q = ConicQuadric.normal_form(0.5, 0.1).congruent(random_sl3(rng))
        v, w = rng.standard_normal(3), rng.standard_normal(3)
        a2, b2 = unit_speed_basis(Q, v, w)
        x = (1 + 1j * a2) * v + 1j * b2 * w
        assert b2 > 0
        assert abs(x @ Q.matrix @ x) < 1e-10 * np.linalg.norm(Q.matrix) * (x.conj() @ x).real


@pytest.mark.parametrize("p, q, case", [(0.0, 0.0, "rotations"), (0.3, 0.3, "circle"),
                                        (0.3, -0.3, "circle"), (0.3, 0.1, "sign flips")])
def test_stabilizers_preserve_the_form(p, q, case):
    rep = stabilizer_check(NormalizedConic.from_pq(p, q))
    assert rep.case == case
    assert rep.max_residual < 1e-12
