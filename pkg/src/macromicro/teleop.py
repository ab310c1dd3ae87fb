"""Clutched, scaled pose mirroring from one stylus stream to two modules.

Each module (macro arm, micro snake) owns an independent clutch driven by
one stylus button. While a clutch is engaged, the stylus pose delta since
engagement is rotated into the robot frame, scaled, and applied on top of
the robot pose captured at engagement, so re-engaging after repositioning
the stylus never jumps the robot.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .geometry import (Pose, quat_conj, quat_from_rotvec, quat_mul,
                       quat_normalize, quat_rotate, quat_to_rotvec)


@dataclass(frozen=True)
class StylusSample:
    """One stylus state: tip pose in the stylus base frame plus buttons."""

    pose: Pose
    white_button: bool = False
    grey_button: bool = False
    timestamp: float = 0.0


@dataclass(frozen=True)
class ClutchState:
    """Engagement latch for one module.

    ``stylus_ref``/``robot_ref`` hold the poses captured at engagement and
    are None exactly when disengaged. ``button_down`` remembers the last
    button level so only edges change the state.
    """

    engaged: bool = False
    stylus_ref: Pose | None = None
    robot_ref: Pose | None = None
    button_down: bool = False

    def __post_init__(self):
        if self.engaged != (self.stylus_ref is not None) or \
           self.engaged != (self.robot_ref is not None):
            raise ValueError("clutch refs must be set iff engaged")


@dataclass(frozen=True)
class TeleopParams:
    """Scaling and frame mapping for one module's teleoperation."""

    translation_scale: float = 1.0
    rotation_scale: float = 1.0
    # rotation from the stylus base frame to the robot base frame (w,x,y,z)
    frame_map: tuple[float, float, float, float] = (1.0, 0.0, 0.0, 0.0)
    hold_to_engage: bool = False

    def __post_init__(self):
        if not (self.translation_scale > 0 and self.rotation_scale > 0):
            raise ValueError("scales must be positive")
        object.__setattr__(self, "frame_map",
                           tuple(quat_normalize(np.asarray(self.frame_map))))

    def frame_quat(self) -> np.ndarray:
        return np.asarray(self.frame_map)


def on_button_edge(state: ClutchState, pressed: bool, stylus_pose: Pose,
                   robot_pose: Pose, hold_to_engage: bool = False) -> ClutchState:
    """Advance the clutch for one observed button level.

    Toggle mode (default): a rising edge flips engagement, capturing the
    reference poses on engage. Hold mode: engaged exactly while pressed.
    Without an edge the state is returned unchanged.
    """
    rising = pressed and not state.button_down
    falling = (not pressed) and state.button_down
    if not (rising or falling):
        return state
    if hold_to_engage:
        want_engaged = pressed
    elif rising:
        want_engaged = not state.engaged
    else:  # falling edge keeps engagement in toggle mode
        return replace(state, button_down=pressed)
    if want_engaged and not state.engaged:
        return ClutchState(engaged=True, stylus_ref=stylus_pose,
                           robot_ref=robot_pose, button_down=pressed)
    if not want_engaged and state.engaged:
        return ClutchState(engaged=False, button_down=pressed)
    return replace(state, button_down=pressed)


def _scale_rotation(q: np.ndarray, scale: float) -> np.ndarray:
    if scale == 1.0:
        return q
    return quat_from_rotvec(scale * quat_to_rotvec(q))


def track(state: ClutchState, params: TeleopParams,
          stylus_pose: Pose) -> Pose | None:
    """Target pose mirroring the stylus motion since engagement.

    Returns None while disengaged. The translation delta is mapped into
    the robot frame and scaled linearly; the rotation delta is scaled in
    axis-angle and composed onto the robot reference orientation.
    """
    if not state.engaged:
        return None
    fm = params.frame_quat()
    fm_inv = quat_conj(fm)
    dp = quat_rotate(fm, stylus_pose.t - state.stylus_ref.t)
    target_t = state.robot_ref.t + params.translation_scale * dp
    dq = quat_mul(fm, quat_mul(quat_mul(stylus_pose.q,
                                        quat_conj(state.stylus_ref.q)), fm_inv))
    dq = _scale_rotation(dq, params.rotation_scale)
    target_q = quat_mul(dq, state.robot_ref.q)
    return Pose(q=target_q, t=target_t)


@dataclass(frozen=True)
class RouteResult:
    macro_state: ClutchState
    micro_state: ClutchState
    macro_target: Pose | None
    micro_target: Pose | None


def route(sample: StylusSample, macro_state: ClutchState,
          micro_state: ClutchState, params_macro: TeleopParams,
          params_micro: TeleopParams, macro_pose: Pose,
          micro_pose: Pose) -> RouteResult:
    """Drive both clutches from one stylus sample.

    The white button gates the macro module and the grey button the micro
    module; both may emit a target in the same tick. ``macro_pose`` /
    ``micro_pose`` are the current robot poses captured as references when
    a clutch engages.
    """
    macro_state = on_button_edge(macro_state, sample.white_button,
                                 sample.pose, macro_pose,
                                 params_macro.hold_to_engage)
    micro_state = on_button_edge(micro_state, sample.grey_button,
                                 sample.pose, micro_pose,
                                 params_micro.hold_to_engage)
    return RouteResult(
        macro_state=macro_state,
        micro_state=micro_state,
        macro_target=track(macro_state, params_macro, sample.pose),
        micro_target=track(micro_state, params_micro, sample.pose),
    )
