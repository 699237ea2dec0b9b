import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from conicfinsler.conics import ConicQuadric
from conicfinsler.errors import InsufficientSamples, ZeroBase
from conicfinsler.finsler import (FinslerNorm, PerturbedNorm, antipodal_check, asymmetry_defect,
                                  asymmetry_identity, finsler_norm, indicatrix_sample, positivity_constant,
                                  quartic_fit, root_oracle, transform_check)
from conicfinsler.projmodel import random_sl3, ray_normalize

E = np.eye(3)
coord = st.floats(-3, 3, allow_nan=False)
vec = st.tuples(coord, coord, coord).map(np.array)
pq = st.floats(0.0, 1.4).flatmap(lambda p: st.tuples(st.just(p), st.floats(-p, p) if p > 0 else st.just(0.0)))


def test_round_unit_vector(round_norm):
    assert finsler_norm(round_norm, E[0], E[1]) == pytest.approx(1.0, abs=1e-15)


def test_closed_form_values(norm_31):
    assert finsler_norm(norm_31, E[0], E[1]) == pytest.approx(np.cos(0.1), abs=1e-14)
    assert finsler_norm(norm_31, E[0], E[2]) == pytest.approx(np.cos(0.3), abs=1e-14)


def test_zero_tangent_class_has_zero_norm(norm_31):
    for c in (0.0, 0.5, 3.0):
        assert abs(finsler_norm(norm_31, (1, 2, 3), c * np.array([1, 2, 3]))) < 1e-14


def test_plain_sequences_are_accepted(norm_31):
    assert float(norm_31.value([1, 0, 0], [0, 1, 0])) == pytest.approx(np.cos(0.1), abs=1e-14)
    assert norm_31.grad_w([1, 0, 0], [0, 1, 0]).shape == (3,)


def test_zero_base_is_rejected(norm_31):
    with pytest.raises(ZeroBase):
        finsler_norm(norm_31, (0, 0, 0), (1, 0, 0))


@given(pq, vec, vec)
def test_closed_form_matches_root_oracle(params, v, w):
    assume(np.linalg.norm(np.cross(v, w)) > 1e-3 * (1 + np.linalg.norm(v) * np.linalg.norm(w)))
    N = FinslerNorm.from_pq(*params)
    scale = np.linalg.norm(w) / np.linalg.norm(v)
    assert float(N.value(v, w)) == pytest.approx(float(root_oracle(N, v, w)), abs=1e-11 * (1 + scale))


@given(vec, vec, st.floats(0.01, 20), st.floats(-20, 20))
def test_norm_lives_on_tangent_classes(v, w, a, b):
    assume(np.linalg.norm(v) > 1e-2)
    N = FinslerNorm.from_pq(0.6, 0.4)
    f0 = float(N.value(v, w))
    assert float(N.value(a * v, a * w + b * v)) == pytest.approx(f0, abs=1e-9 * (1 + abs(f0)))


@given(vec, vec, st.floats(0.0, 10))
def test_positive_homogeneity(v, w, c):
    assume(np.linalg.norm(v) > 1e-2)
    N = FinslerNorm.from_pq(0.3, 0.1)
    f0 = float(N.value(v, w))
    assert float(N.value(v, c * w)) == pytest.approx(c * f0, abs=1e-10 * (1 + c * abs(f0)))


def test_norm_is_positive_off_the_zero_class():
    for p, q in [(0.0, 0.0), (0.3, 0.1), (0.6, 0.4), (1.4, -1.0)]:
        assert positivity_constant(FinslerNorm.from_pq(p, q), 5000) > 0


def test_triangle_inequality_on_fibers(rng):
    N = FinslerNorm.from_pq(0.6, 0.4)
    v = rng.standard_normal((2000, 3))
    w1, w2 = rng.standard_normal((2, 2000, 3))
    assert np.all(N.value(v, w1 + w2) <= N.value(v, w1) + N.value(v, w2) + 1e-12)


def test_gradient_matches_differences(rng):
    for N in (FinslerNorm.from_pq(0.3, 0.1), PerturbedNorm(FinslerNorm.from_pq(0.3, 0.1), 1e-2)):
        v, w = rng.standard_normal(3), rng.standard_normal(3)
        h = 1e-6
        fd = np.array([(N.value(v, w + h * e) - N.value(v, w - h * e)) / (2 * h) for e in E])
        assert np.allclose(N.grad_w(v, w), fd, atol=1e-8)
        # Euler: w . grad_w F = F
        assert float(w @ N.grad_w(v, w)) == pytest.approx(float(N.value(v, w)), abs=1e-12)


def test_structure_is_invariant_under_congruence(rng):
    base = ConicQuadric.normal_form(0.4, 0.2)
    g = random_sl3(rng)
    N0 = FinslerNorm.from_pq(0.4, 0.2)
    N1 = FinslerNorm.from_quadric(base.congruent(g))
    v, w = rng.standard_normal((2, 500, 3))
    # F1(v, w) = F0(g v, g w)
    assert np.allclose(N1.value(v, w), N0.value(v @ g.m.T, w @ g.m.T), atol=1e-10)


def test_round_case_is_symmetric(round_norm, rng):
    for _ in range(50):
        v, w = rng.standard_normal((2, 3))
        assert abs(asymmetry_defect(round_norm, v, w)) < 1e-12


def test_asymmetry_identity_and_probe(norm_31, rng):
    for _ in range(200):
        v, w = rng.standard_normal((2, 3))
        assert asymmetry_defect(norm_31, v, w) == pytest.approx(asymmetry_identity(norm_31, v, w), abs=1e-12)
    probe = asymmetry_defect(norm_31, (1, 1, 0), (1, -1, 0))
    assert probe == pytest.approx(2 * np.tan(0.1), abs=1e-9)
    assert abs(asymmetry_defect(norm_31, E[0], E[1])) < 1e-15


def test_antipodal_and_stabilizer_invariance(norm_31):
    assert antipodal_check(norm_31, 10_000) < 1e-12
    assert transform_check(norm_31, np.diag([-1.0, 1.0, -1.0]), 10_000) < 1e-12
    assert antipodal_check(FinslerNorm.from_pq(0.0, 0.0), 1000) < 1e-15


def test_round_indicatrix_is_a_unit_circle(round_norm):
    curve = indicatrix_sample(round_norm, ray_normalize((0.3, -0.2, 1.0)), 128)
    assert np.allclose(np.linalg.norm(curve.samples, axis=1), 1.0, atol=1e-14)
    assert quartic_fit(curve)[1] < 1e-10


def test_indicatrix_points_have_unit_norm(norm_31):
    base = ray_normalize((0.3, -0.5, 0.8))
    curve = indicatrix_sample(norm_31, base, 256)
    v = np.broadcast_to(base.rep, curve.samples.shape)
    assert np.allclose(norm_31.value(v, curve.samples), 1.0, atol=1e-14)
    assert np.allclose(curve.samples @ base.rep, 0.0, atol=1e-14)


def test_indicatrix_is_strictly_convex():
    curve = indicatrix_sample(FinslerNorm.from_pq(0.4, 0.2), ray_normalize(E[0]), 1024)
    e = np.roll(curve.coords, -1, axis=0) - curve.coords
    turn = e[:, 0] * np.roll(e, -1, axis=0)[:, 1] - e[:, 1] * np.roll(e, -1, axis=0)[:, 0]
    assert np.all(turn > 0)


def test_quartic_but_not_quadric():
    N = FinslerNorm.from_pq(0.4, 0.2)
    deg4, deg2 = quartic_fit(indicatrix_sample(N, ray_normalize(E[0]), 256))
    assert deg4 < 1e-8 and deg2 > 1e-3
    assert deg4 <= deg2 + 1e-12


def test_sample_count_guards(norm_31):
    with pytest.raises(InsufficientSamples):
        indicatrix_sample(norm_31, ray_normalize(E[0]), 8)
    with pytest.raises(InsufficientSamples):
        quartic_fit(indicatrix_sample(norm_31, ray_normalize(E[0]), 32))


def test_perturbation_is_local_and_small(norm_31, rng):
    P = PerturbedNorm(norm_31, 1e-3)
    v, w = rng.standard_normal((2, 1000, 3))
    diff = np.abs(P.value(v, w) - norm_31.value(v, w))
    assert diff.max() < 1e-3 * np.linalg.norm(w, axis=1).max() * 10
    assert diff.max() > 0
    # far from the bump centre the change is negligible
    far = -np.array([0.3, 0.2, 1.0])
    assert abs(float(P.value(far, E[0]) - norm_31.value(far, E[0]))) < 1e-9
