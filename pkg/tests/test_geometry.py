import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from macromicro.geometry import (Pose, quat_from_axis_angle, quat_from_matrix,
                                 quat_from_rotvec, quat_mul, quat_normalize,
                                 quat_slerp, quat_to_matrix, quat_to_rotvec,
                                 rotation_angle)


def random_pose(rng) -> Pose:
    q = quat_normalize(rng.normal(size=4))
    return Pose(q=q, t=rng.normal(scale=100.0, size=3))


unit_quats = st.tuples(*(st.floats(-1, 1) for _ in range(4))).filter(
    lambda q: sum(v * v for v in q) > 1e-6).map(
    lambda q: quat_normalize(np.array(q)))


@given(unit_quats)
def test_quat_matrix_round_trip(q):
    r = quat_to_matrix(q)
    assert np.allclose(r @ r.T, np.eye(3), atol=1e-12)
    q2 = quat_from_matrix(r)
    # q and -q encode the same rotation
    assert min(np.linalg.norm(q2 - q), np.linalg.norm(q2 + q)) < 1e-9


@given(unit_quats)
def test_rotvec_round_trip(q):
    v = quat_to_rotvec(q)
    q2 = quat_from_rotvec(v)
    assert min(np.linalg.norm(q2 - q), np.linalg.norm(q2 + q)) < 1e-9


def test_compose_identity_exact():
    rng = np.random.default_rng(7)
    for _ in range(50):
        p = random_pose(rng)
        r = p @ Pose.identity()
        assert np.allclose(r.q, p.q, atol=1e-12)
        assert np.allclose(r.t, p.t, atol=1e-12)


def test_quaternion_stays_unit_under_composition():
    rng = np.random.default_rng(11)
    p = Pose.identity()
    for _ in range(2000):
        p = p @ random_pose(rng)
        assert abs(float(p.q @ p.q) - 1.0) < 1e-9


def test_inverse_cancels():
    rng = np.random.default_rng(3)
    for _ in range(50):
        p = random_pose(rng)
        ident = p @ p.inverse()
        assert ident.position_error(Pose.identity()) < 1e-9
        assert ident.rotation_error(Pose.identity()) < 1e-9


def test_apply_matches_matrix():
    rng = np.random.default_rng(5)
    p = random_pose(rng)
    v = rng.normal(size=3)
    expected = (p.matrix() @ np.append(v, 1.0))[:3]
    assert np.allclose(p.apply(v), expected, atol=1e-9)


def test_axis_angle_basics():
    p = Pose.from_axis_angle((0, 0, 1), math.pi / 2)
    assert np.allclose(p.apply((1, 0, 0)), (0, 1, 0), atol=1e-12)
    assert rotation_angle(p.q) == pytest.approx(math.pi / 2, abs=1e-12)


def test_slerp_endpoints_and_midpoint():
    a = quat_from_axis_angle(np.array([0.0, 0.0, 1.0]), 0.0)
    b = quat_from_axis_angle(np.array([0.0, 0.0, 1.0]), 1.0)
    assert np.allclose(quat_slerp(a, b, 0.0), a)
    assert np.allclose(quat_slerp(a, b, 1.0), b)
    mid = quat_slerp(a, b, 0.5)
    assert rotation_angle(quat_mul(mid, np.array([b[0], -b[1], -b[2], -b[3]])
                                   )) == pytest.approx(0.5, abs=1e-9)


def test_pose_dict_round_trip():
    rng = np.random.default_rng(13)
    p = random_pose(rng)
    p2 = Pose.from_dict(p.as_dict())
    assert p.is_close(p2, 1e-12, 1e-12)
