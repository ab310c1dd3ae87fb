import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from macromicro.geometry import (Pose, quat_from_axis_angle, quat_mul,
                                 quat_normalize, rotation_angle)
from macromicro.teleop import (ClutchState, StylusSample, TeleopParams,
                               on_button_edge, route, track)


def pose(x=0.0, y=0.0, z=0.0, axis=(0, 0, 1), angle=0.0) -> Pose:
    return Pose.from_axis_angle(axis, angle, (x, y, z))


ROBOT_HOME = pose(100.0, -50.0, 30.0, axis=(1, 0, 0), angle=0.4)


def test_press_engages_and_captures_refs():
    s = on_button_edge(ClutchState(), True, pose(1.0), ROBOT_HOME)
    assert s.engaged and s.button_down
    assert s.stylus_ref.is_close(pose(1.0))
    assert s.robot_ref.is_close(ROBOT_HOME)


def test_second_press_disengages():
    s = on_button_edge(ClutchState(), True, pose(), ROBOT_HOME)
    s = on_button_edge(s, False, pose(5.0), ROBOT_HOME)   # release: no change
    assert s.engaged
    s = on_button_edge(s, True, pose(5.0), ROBOT_HOME)    # second press
    assert not s.engaged and s.stylus_ref is None and s.robot_ref is None


def test_hold_without_edge_is_identity():
    s = on_button_edge(ClutchState(), True, pose(), ROBOT_HOME)
    held = on_button_edge(s, True, pose(9.0), ROBOT_HOME)
    assert held is s


def test_hold_to_engage_mode():
    s = on_button_edge(ClutchState(), True, pose(), ROBOT_HOME,
                       hold_to_engage=True)
    assert s.engaged
    s = on_button_edge(s, False, pose(), ROBOT_HOME, hold_to_engage=True)
    assert not s.engaged


def test_refs_iff_engaged_invariant():
    with pytest.raises(ValueError):
        ClutchState(engaged=True)
    with pytest.raises(ValueError):
        ClutchState(engaged=False, stylus_ref=pose(), robot_ref=pose())


# ---------------------------------------------------------------------------
# tracking

def engaged_state(stylus_ref: Pose, robot_ref: Pose) -> ClutchState:
    return ClutchState(engaged=True, stylus_ref=stylus_ref,
                       robot_ref=robot_ref, button_down=False)


def test_disengaged_tracks_nothing():
    assert track(ClutchState(), TeleopParams(), pose(3.0)) is None


def test_at_reference_emits_robot_ref_exactly():
    st_ref = pose(3.0, 2.0, 1.0, angle=0.3)
    s = engaged_state(st_ref, ROBOT_HOME)
    target = track(s, TeleopParams(), st_ref)
    assert target.is_close(ROBOT_HOME, 1e-12, 1e-12)


def test_translation_scaling():
    s = engaged_state(pose(), ROBOT_HOME)
    params = TeleopParams(translation_scale=0.5)
    target = track(s, params, pose(10.0))
    assert np.allclose(target.t, ROBOT_HOME.t + [5.0, 0.0, 0.0], atol=1e-12)
    assert target.rotation_error(ROBOT_HOME) < 1e-12


def test_rotation_composes_onto_robot_ref():
    s = engaged_state(pose(), ROBOT_HOME)
    turned = pose(angle=math.radians(30.0))
    target = track(s, TeleopParams(), turned)
    expected_q = quat_mul(quat_from_axis_angle(np.array([0.0, 0.0, 1.0]),
                                               math.radians(30.0)),
                          ROBOT_HOME.q)
    assert rotation_angle(quat_mul(target.q, np.array(
        [expected_q[0], -expected_q[1], -expected_q[2], -expected_q[3]]))) < 1e-12
    assert np.allclose(target.t, ROBOT_HOME.t, atol=1e-12)


def test_rotation_scale_halves_angle():
    s = engaged_state(pose(), ROBOT_HOME)
    turned = pose(axis=(0, 1, 0), angle=0.8)
    target = track(s, TeleopParams(rotation_scale=0.5), turned)
    assert target.rotation_error(ROBOT_HOME) == pytest.approx(0.4, abs=1e-12)


def test_frame_map_rotates_deltas():
    # stylus +x maps to robot +y under a 90 degree frame map
    fm = tuple(quat_from_axis_angle(np.array([0.0, 0.0, 1.0]), math.pi / 2))
    s = engaged_state(pose(), ROBOT_HOME)
    target = track(s, TeleopParams(frame_map=fm), pose(10.0))
    assert np.allclose(target.t, ROBOT_HOME.t + [0.0, 10.0, 0.0], atol=1e-9)


def test_frame_map_equivariance(rng):
    # conjugating the stylus stream by a rotation and folding that rotation
    # into frame_map leaves the emitted targets unchanged
    conj = quat_normalize(rng.normal(size=4))
    base_params = TeleopParams(translation_scale=0.7, rotation_scale=1.0)
    mapped_params = TeleopParams(
        translation_scale=0.7, rotation_scale=1.0,
        frame_map=tuple(np.array([conj[0], -conj[1], -conj[2], -conj[3]])))
    for _ in range(20):
        st_ref = Pose(q=quat_normalize(rng.normal(size=4)),
                      t=rng.normal(scale=50, size=3))
        st_now = Pose(q=quat_normalize(rng.normal(size=4)),
                      t=rng.normal(scale=50, size=3))
        rot = Pose(q=conj, t=np.zeros(3))
        plain = track(engaged_state(st_ref, ROBOT_HOME), base_params, st_now)
        conjugated = track(engaged_state(rot @ st_ref, ROBOT_HOME),
                           mapped_params, rot @ st_now)
        assert plain.is_close(conjugated, 1e-9, 1e-9)


def test_reengage_continuity(rng):
    params = TeleopParams(translation_scale=0.3)
    robot = ROBOT_HOME
    s = on_button_edge(ClutchState(), True, pose(), robot)
    target = track(s, params, pose(4.0))
    robot = target
    s = on_button_edge(s, False, pose(4.0), robot)
    s = on_button_edge(s, True, pose(4.0), robot)     # press: disengage
    assert not s.engaged
    # stylus wanders far away while disengaged
    wander = pose(500.0, -200.0, 90.0, angle=2.0)
    assert track(s, params, wander) is None
    s = on_button_edge(s, False, wander, robot)
    s = on_button_edge(s, True, wander, robot)        # re-engage out there
    first = track(s, params, wander)
    assert first.is_close(robot, 1e-9, 1e-9)


# ---------------------------------------------------------------------------
# routing

def test_route_independent_buttons():
    params = TeleopParams()
    macro = micro = ClutchState()
    sample = StylusSample(pose=pose(), white_button=False, grey_button=False)
    r = route(sample, macro, micro, params, params, ROBOT_HOME, pose())
    assert r.macro_target is None and r.micro_target is None

    sample = StylusSample(pose=pose(), white_button=True, grey_button=False,
                          timestamp=0.001)
    r = route(sample, r.macro_state, r.micro_state, params, params,
              ROBOT_HOME, pose())
    assert r.macro_target is not None and r.micro_target is None

    sample = StylusSample(pose=pose(2.0), white_button=True, grey_button=True,
                          timestamp=0.002)
    r = route(sample, r.macro_state, r.micro_state, params, params,
              ROBOT_HOME, pose())
    assert r.macro_target is not None and r.micro_target is not None


@given(st.lists(st.tuples(st.booleans(), st.booleans(),
                          st.floats(-50, 50), st.floats(-50, 50)),
                min_size=1, max_size=60))
@settings(max_examples=120, deadline=None)
def test_never_engaged_module_receives_nothing(stream):
    params = TeleopParams()
    macro = micro = ClutchState()
    micro_targets = []
    for white, _, x, y in stream:
        sample = StylusSample(pose=pose(x, y), white_button=white,
                              grey_button=False)
        r = route(sample, macro, micro, params, params, ROBOT_HOME, pose())
        macro, micro = r.macro_state, r.micro_state
        micro_targets.append(r.micro_target)
    assert all(t is None for t in micro_targets)
