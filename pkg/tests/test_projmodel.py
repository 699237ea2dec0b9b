import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from conicfinsler.errors import DegenerateSpan, GeometryError, ZeroVector
from conicfinsler.projmodel import (SL3, RayPoint, line_through, random_sl3, ray_normalize, sl3_act,
                                    tangent_canonical)

coord = st.floats(-10, 10, allow_nan=False)
vec = st.tuples(coord, coord, coord).map(np.array)


@pytest.mark.parametrize("v, expected", [
    ((2, 0, 0), (1, 0, 0)),
    ((0, -3, 0), (0, -1, 0)),
    ((1, 1, 1), np.ones(3) / np.sqrt(3)),
])
def test_ray_normalize_examples(v, expected):
    assert np.allclose(ray_normalize(v).rep, expected, atol=1e-15)


def test_opposite_rays_differ():
    assert ray_normalize((0, 1, 0)) != ray_normalize((0, -1, 0))


def test_ray_normalize_rejects_zero_and_bad_shapes():
    with pytest.raises(ZeroVector):
        ray_normalize((0, 0, 0))
    with pytest.raises(GeometryError):
        ray_normalize((1, 2))
    with pytest.raises(GeometryError):
        ray_normalize((np.nan, 0, 1))


def test_tangent_canonical_examples():
    t = tangent_canonical((1, 0, 0), (5, 1, 0))
    assert np.allclose(t.base, (1, 0, 0)) and np.allclose(t.dir, (0, 1, 0))
    # the stated formula (w - (w.v) v/|v|^2)/|v| and the class law both give (0, 1, 0)
    t = tangent_canonical((2, 0, 0), (0, 2, 0))
    assert np.allclose(t.base, (1, 0, 0)) and np.allclose(t.dir, (0, 1, 0))
    t = tangent_canonical((1, 0, 0), (3, 0, 0))
    assert np.allclose(t.dir, 0)


@given(vec, vec, st.floats(0.01, 100), st.floats(-50, 50))
def test_tangent_canonical_is_constant_on_classes(v, w, a, b):
    assume(np.linalg.norm(v) > 1e-3)
    t0 = tangent_canonical(v, w)
    t1 = tangent_canonical(a * v, a * w + b * v)
    scale = 1 + np.linalg.norm(w) / np.linalg.norm(v)
    assert np.allclose(t0.base, t1.base, atol=1e-12)
    assert np.allclose(t0.dir, t1.dir, atol=1e-10 * scale)
    assert abs(t0.dir @ t0.base) < 1e-12 * scale


def test_tangent_scaling_only_by_nonnegative():
    t = tangent_canonical((1, 0, 0), (0, 1, 0))
    assert np.allclose(t.scaled(2.0).dir, (0, 2, 0))
    with pytest.raises(ValueError):
        t.scaled(-1.0)


@pytest.mark.parametrize("v0, v1, cov", [
    ((1, 0, 0), (0, 1, 0), (0, 0, 1)),
    ((0, 1, 0), (1, 0, 0), (0, 0, -1)),
    ((1, 0, 0), (1, 1, 0), (0, 0, 1)),
])
def test_line_through_examples(v0, v1, cov):
    assert np.allclose(line_through(v0, v1).covector.rep, cov)


def test_line_through_degenerate():
    with pytest.raises(DegenerateSpan):
        line_through((1, 2, 3), (2, 4, 6))
    with pytest.raises(DegenerateSpan):
        line_through((1, 0, 0), (1, 1e-14, 0))


def test_sl3_validation_and_group_ops(rng):
    with pytest.raises(GeometryError):
        SL3(np.diag([1.0, 1.0, 2.0]))
    g, h = random_sl3(rng), random_sl3(rng)
    assert abs(np.linalg.det((g @ h).m) - 1) < 1e-12
    assert np.allclose((g @ g.inverse()).m, np.eye(3), atol=1e-12)
    assert np.allclose(SL3.from_matrix(2 * np.eye(3)).m, np.eye(3))


def test_identity_action_is_trivial():
    p = ray_normalize((0.3, -1, 2))
    assert sl3_act(SL3.identity(), p) == p


def test_action_is_equivariant_and_keeps_incidence(rng):
    for _ in range(20):
        g = random_sl3(rng)
        v0, v1 = rng.standard_normal(3), rng.standard_normal(3)
        moved = sl3_act(g, line_through(v0, v1))
        direct = line_through(g.m @ v0, g.m @ v1)
        assert np.allclose(moved.covector.rep, direct.covector.rep, atol=1e-10)
        x = 0.4 * v0 - 1.3 * v1
        assert abs(moved.incidence(g.m @ x)) < 1e-10 * np.linalg.norm(g.m @ x)


def test_tangent_action_matches_derivative(rng):
    g = random_sl3(rng)
    v, w = rng.standard_normal(3), rng.standard_normal(3)
    moved = sl3_act(g, tangent_canonical(v, w))
    ref = tangent_canonical(g.m @ v, g.m @ w)
    assert np.allclose(moved.base, ref.base) and np.allclose(moved.dir, ref.dir)


def test_ray_hash_and_equality():
    a, b = ray_normalize((1, 2, 3)), ray_normalize((2, 4, 6))
    assert a == b and hash(a) == hash(b)
    assert isinstance(a, RayPoint)
