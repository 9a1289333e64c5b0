import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from spectral_pgo.lie import (
    IllConditionedLogError,
    Pose,
    adjoint,
    compose,
    exp_map,
    inverse,
    log_map,
    quat_to_matrix,
    skew,
    wrap_angle,
)

from conftest import random_pose


def hat(v):
    """Homogeneous-matrix Lie algebra element, translation first."""
    v = np.asarray(v, dtype=float)
    if v.size == 3:
        out = np.zeros((3, 3))
        out[0, 1], out[1, 0] = -v[2], v[2]
        out[:2, 2] = v[:2]
        return out
    out = np.zeros((4, 4))
    out[:3, :3] = skew(v[3:])
    out[:3, 3] = v[:3]
    return out


def small_twist(dim, max_angle=2.5):
    n = 3 if dim == 2 else 6
    rot = 1 if dim == 2 else 3
    comp = st.floats(-3.0, 3.0, allow_nan=False)
    return st.lists(comp, min_size=n, max_size=n).map(np.array).filter(
        lambda v: np.linalg.norm(v[n - rot:]) < max_angle
    )


def test_wrap_angle_range():
    assert wrap_angle(math.pi) == pytest.approx(math.pi)
    assert wrap_angle(-math.pi) == pytest.approx(math.pi)
    assert wrap_angle(3 * math.pi / 2) == pytest.approx(-math.pi / 2)
    assert wrap_angle(0.25) == 0.25


def test_quaternion_normalized_and_matrix_orthogonal():
    p = Pose.se3((1, 2, 3), (2.0, 0.0, 0.0, 0.0))
    assert p.quat == (1.0, 0.0, 0.0, 0.0)
    q = np.array([0.9, 0.1, -0.3, 0.2])
    r = quat_to_matrix(q / np.linalg.norm(q))
    np.testing.assert_allclose(r @ r.T, np.eye(3), atol=1e-14)
    assert np.linalg.det(r) == pytest.approx(1.0)


def test_invalid_layout_and_mixed_compose():
    with pytest.raises(ValueError):
        Pose((1.0, 2.0), (0.0, 0.0))
    with pytest.raises(ValueError):
        compose(Pose.identity(2), Pose.identity(3))
    with pytest.raises(ValueError):
        Pose.identity(4)
    with pytest.raises(ValueError):
        exp_map(np.zeros(4))


def test_adjoint_closed_form_2d():
    p = Pose.se2(1.5, -2.0, 0.3)
    c, s = math.cos(0.3), math.sin(0.3)
    expected = np.array([[c, -s, -2.0], [s, c, -1.5], [0, 0, 1]])
    np.testing.assert_allclose(adjoint(p), expected, atol=1e-15)


@pytest.mark.parametrize("dim", [2, 3])
def test_compose_matches_homogeneous_product(rng, dim):
    for _ in range(50):
        a, b = random_pose(rng, dim, 2.0), random_pose(rng, dim, 2.0)
        np.testing.assert_allclose((a @ b).matrix(), a.matrix() @ b.matrix(), atol=1e-12)
        np.testing.assert_allclose(inverse(a).matrix(), np.linalg.inv(a.matrix()), atol=1e-12)


@pytest.mark.parametrize("dim", [2, 3])
def test_exp_matches_matrix_exponential(rng, dim):
    for _ in range(50):
        v = rng.normal(size=3 if dim == 2 else 6)
        np.testing.assert_allclose(exp_map(v).matrix(), expm(hat(v)), atol=1e-12)


@pytest.mark.parametrize("dim", [2, 3])
def test_small_angle_branch_continuous(dim):
    n = 3 if dim == 2 else 6
    v = np.full(n, 1e-10)
    v[: dim] = [0.5] * dim
    np.testing.assert_allclose(exp_map(v).matrix(), expm(hat(v)), atol=1e-14)
    np.testing.assert_allclose(log_map(exp_map(v)), v, atol=1e-14)


@settings(max_examples=60, deadline=None)
@given(v=small_twist(2))
def test_log_exp_roundtrip_2d(v):
    np.testing.assert_allclose(log_map(exp_map(v)), v, atol=1e-9)


@settings(max_examples=60, deadline=None)
@given(v=small_twist(3))
def test_log_exp_roundtrip_3d(v):
    np.testing.assert_allclose(log_map(exp_map(v)), v, atol=1e-9)


@pytest.mark.parametrize("dim", [2, 3])
def test_log_near_pi_rejected(dim):
    v = np.zeros(3 if dim == 2 else 6)
    v[-1] = math.pi - 1e-9
    with pytest.raises(IllConditionedLogError):
        log_map(exp_map(v))


@pytest.mark.parametrize("dim", [2, 3])
def test_adjoint_conjugation_against_expm(rng, dim):
    for _ in range(30):
        a = random_pose(rng, dim, 3.0)
        v = rng.normal(size=3 if dim == 2 else 6)
        lhs = expm(hat(adjoint(a) @ v))
        rhs = a.matrix() @ expm(hat(v)) @ np.linalg.inv(a.matrix())
        np.testing.assert_allclose(lhs, rhs, atol=1e-10)


@pytest.mark.parametrize("dim", [2, 3])
def test_adjoint_of_inverse_is_inverse(rng, dim):
    a = random_pose(rng, dim, 3.0)
    np.testing.assert_allclose(adjoint(inverse(a)), np.linalg.inv(adjoint(a)), atol=1e-12)


@pytest.mark.parametrize("angle", [1e-9, 1e-7, 1e-5, 1e-3, 0.0099, 0.0101])
def test_small_rotation_precision(angle):
    v = np.array([0.0, 0.0, 1.0, 0.0, angle, angle])
    np.testing.assert_allclose(log_map(exp_map(v)), v, atol=1e-14)
    np.testing.assert_allclose(exp_map(v).matrix(), expm(hat(v)), atol=1e-14)
    w = np.array([1.0, -2.0, angle])
    np.testing.assert_allclose(log_map(exp_map(w)), w, atol=1e-14)
