"""Serial-arm kinematics tests.

The zero-configuration pose of the shipped six-axis table was computed
symbolically (exact rational arithmetic on the six-matrix chain product)
before this module existed and is frozen here.
"""

import math

import numpy as np
import pytest

from macromicro.arm import (ArmConfig, DHTable, arm_fk, arm_ik, arm_jacobian,
                            result_arm_config)
from macromicro.geometry import Pose
from macromicro.ik import IkOptions


def planar_table(l1: float = 300.0, l2: float = 200.0) -> DHTable:
    rows = [(l1, 0.0, 0.0, 0.0), (l2, 0.0, 0.0, 0.0)] + [(0.0,) * 4] * 4
    return DHTable(rows=tuple(rows))


def test_planar_straight_chain():
    tip = arm_fk(planar_table(), ArmConfig())
    assert np.allclose(tip.t, (500.0, 0.0, 0.0), atol=1e-12)


def test_planar_quarter_turn():
    q = ArmConfig(joints=(math.pi / 2, 0, 0, 0, 0, 0))
    tip = arm_fk(planar_table(), q)
    assert np.allclose(tip.t, (0.0, 500.0, 0.0), atol=1e-9)


def test_planar_elbow():
    q = ArmConfig(joints=(0, math.pi / 2, 0, 0, 0, 0))
    tip = arm_fk(planar_table(), q)
    assert np.allclose(tip.t, (300.0, 200.0, 0.0), atol=1e-9)


# frozen symbolic chain product at q = 0 (exact rationals: -4086/5,
# -2329/10, 314/5)
UR5E_ZERO_POS = (-817.2, -232.9, 62.8)
UR5E_ZERO_ROT = np.array([[1.0, 0.0, 0.0],
                          [0.0, 0.0, -1.0],
                          [0.0, 1.0, 0.0]])


def test_shipped_table_zero_pose_matches_symbolic_product():
    tip = arm_fk(DHTable.ur5e(), ArmConfig())
    assert np.allclose(tip.t, UR5E_ZERO_POS, atol=1e-9)
    assert np.allclose(tip.rotation_matrix(), UR5E_ZERO_ROT, atol=1e-12)


def test_reach_bound(rng):
    dh = DHTable.ur5e()
    for _ in range(200):
        q = ArmConfig(joints=tuple(rng.uniform(-2 * math.pi, 2 * math.pi, 6)))
        tip = arm_fk(dh, q)
        assert np.linalg.norm(tip.t) <= dh.reach + 1e-9


def test_jacobian_first_column_is_base_rotation(rng):
    dh = DHTable.ur5e()
    q = ArmConfig()
    jac = arm_jacobian(dh, q)
    tip = arm_fk(dh, q)
    # base joint spins the tip about +z: linear velocity = z x p
    expected = np.cross([0.0, 0.0, 1.0], tip.t)
    assert np.allclose(jac[:3, 0], expected, atol=1e-3)
    assert np.allclose(jac[3:, 0], [0.0, 0.0, 1.0], atol=1e-6)


def test_ik_fixed_point():
    dh = DHTable.ur5e()
    q = ArmConfig(joints=(0.3, -0.9, 0.7, 0.2, 1.1, -0.4))
    res = arm_ik(dh, arm_fk(dh, q), q)
    assert res.converged and res.iterations == 0


def test_ik_round_trip_with_perturbed_seed(rng):
    dh = DHTable.ur5e()
    ok = 0
    for _ in range(40):
        q = rng.uniform(-2 * math.pi, 2 * math.pi, 6)
        target = arm_fk(dh, ArmConfig(joints=tuple(q)))
        seed = np.clip(q + rng.uniform(-0.1, 0.1, 6),
                       -2 * math.pi, 2 * math.pi)
        res = arm_ik(dh, target, ArmConfig(joints=tuple(seed)))
        tip = arm_fk(dh, result_arm_config(res))
        if res.converged and tip.position_error(target) < 0.01 \
                and math.degrees(tip.rotation_error(target)) < 0.1:
            ok += 1
    assert ok >= 39


def test_unreachable_target_flagged():
    dh = DHTable.ur5e()
    beyond = Pose.from_translation((dh.reach + 100.0, 0.0, 0.0))
    res = arm_ik(dh, beyond, ArmConfig(), opts=IkOptions(max_iters=80))
    assert not res.converged


def test_table_validation():
    with pytest.raises(ValueError):
        DHTable(rows=((0.0, 0.0, 0.0, 0.0),) * 5)
    with pytest.raises(ValueError):
        DHTable(rows=((0.0, math.inf, 0.0, 0.0),) + ((0.0,) * 4,) * 5)
