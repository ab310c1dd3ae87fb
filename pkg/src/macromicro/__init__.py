"""Macro-micro teleoperated continuum manipulator simulator.

A desk-scale, hardware-free model of a two-stage teleoperated system: a
6-DOF serial arm carrying a tendon-driven rolling-joint continuum tip,
driven from a clutched, scaled stylus stream, with the actuator chain
emulated behind a TCP wire protocol and everything bound together by a
deterministic fixed-timestep simulation.
"""

from .arm import ArmConfig, DHTable, arm_fk, arm_ik, arm_jacobian
from .geometry import Pose
from .ik import IkOptions, IkResult, dls_step, solve_ik
from .snake import (ActuatorCommand, ModuleParams, SnakeConfig,
                    SnakeDescriptor, TendonState, interface_transform,
                    joints_to_tendons, snake_fk, snake_jacobian,
                    tendon_delta, tendons_to_actuators)
from .teleop import ClutchState, StylusSample, TeleopParams, route, track

__version__ = "0.1.0"

__all__ = [
    "ActuatorCommand", "ArmConfig", "ClutchState", "DHTable", "IkOptions",
    "IkResult", "ModuleParams", "Pose", "SnakeConfig", "SnakeDescriptor",
    "StylusSample", "TeleopParams", "TendonState", "arm_fk", "arm_ik",
    "arm_jacobian", "dls_step", "interface_transform", "joints_to_tendons",
    "route", "snake_fk", "snake_jacobian", "solve_ik", "tendon_delta",
    "tendons_to_actuators", "track",
]
