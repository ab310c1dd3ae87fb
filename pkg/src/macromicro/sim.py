"""Deterministic fixed-timestep simulation binding the whole pipeline.

Each control tick consumes the stylus samples generated since the last
tick (latest sample wins), advances both clutches, runs the macro target
through arm IK and the micro target through snake IK, maps the snake
configuration to tendon lengths and pulley angles, ships those over the
TCP actuator protocol to the servo emulator, and records frames at the
recorder rate. Identical inputs produce identical traces byte for byte.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from .arm import ArmConfig, arm_fk, arm_ik
from .config import SystemConfig
from .geometry import Pose
from .ik import iterate_dls, _snake_eval
from .scenario import Scenario
from .server import ServoClient, ServoServer, SimClock
from .snake import (SnakeConfig, clamp_config, joints_to_tendons, snake_fk,
                    tendons_to_actuators)
from .protocol import ServoBank
from .teleop import ClutchState, StylusSample, route

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SimFrame:
    """One recorded instant of the full system state."""

    t: float
    stylus: StylusSample
    macro_joints: tuple[float, ...]
    snake_angles: tuple[float, float, float, float]
    flange_pose: Pose
    tip_pose: Pose                 # world = arm base frame
    macro_engaged: bool
    micro_engaged: bool
    pulley_angles: tuple[float, float, float, float]
    macro_target: Pose | None = None
    micro_target: Pose | None = None   # micro-base (flange) frame


@dataclass
class RunResult:
    frames: list[SimFrame]
    ticks: int
    stylus_samples: int
    ik_rejections_macro: int
    ik_rejections_micro: int
    scenario_name: str
    seed: int


class Simulation:
    """Single-owner simulation loop over a stylus source.

    The loop itself is synchronous and deterministic; live mode drives
    ``step`` from a wall-clock pacer and feeds samples from the telemetry
    channel instead of a scenario script.
    """

    # per-tick IK budget: targets move a little each tick, so a short
    # budget converges; the full budget applies to standalone solves
    TICK_IK_BUDGET = 40

    def __init__(self, cfg: SystemConfig, scenario: Scenario | None = None,
                 seed: int = 0):
        self.cfg = cfg
        self.scenario = scenario
        self.seed = seed
        self.clock = SimClock()
        self.bank = ServoBank(count=4, max_speed=cfg.protocol.max_speed,
                              travel=(-cfg.protocol.travel,
                                      cfg.protocol.travel))
        self._server = ServoServer(self.bank, self.clock,
                                   host=cfg.protocol.host,
                                   port=cfg.protocol.port)
        self._client: ServoClient | None = None
        self._opts = replace(cfg.ik,
                             max_iters=min(cfg.ik.max_iters,
                                           self.TICK_IK_BUDGET))
        self._micro_opts = replace(self._opts,
                                   rot_weight=cfg.micro_rot_weight)

        arm_joints = (scenario.initial_arm_joints if scenario
                      else (0.0, -math.pi / 2, math.pi / 2, -math.pi / 2,
                            -math.pi / 2, 0.0))
        snake_angles = (scenario.initial_snake_angles if scenario
                        else (0.0,) * 4)
        self.arm_q = np.array(arm_joints, dtype=float)
        self.snake_q = SnakeConfig(angles=tuple(snake_angles))
        self.macro_clutch = ClutchState()
        self.micro_clutch = ClutchState()
        self.tick = 0
        self.stylus_samples = 0
        self.ik_rejections_macro = 0
        self.ik_rejections_micro = 0
        self._last_pulleys = (0.0,) * 4

    # frame helpers -------------------------------------------------------

    def flange_pose(self) -> Pose:
        return arm_fk(self.cfg.dh, ArmConfig(joints=tuple(self.arm_q)))

    def micro_pose_flange(self) -> Pose:
        """Snake tip in the flange frame (mounting offset included)."""
        return self.cfg.flange_offset @ snake_fk(self.cfg.snake, self.snake_q)

    def start(self) -> "Simulation":
        self._server.start()
        self._client = ServoClient(self._server.address)
        return self

    def close(self) -> None:
        if self._client is not None:
            self._client.close()
            self._client = None
        self._server.stop()

    def __enter__(self) -> "Simulation":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.close()

    # control loop --------------------------------------------------------

    def step(self, sample: StylusSample) -> SimFrame:
        """Advance one control tick with the given (latest) stylus sample."""
        cfg = self.cfg
        routed = route(sample, self.macro_clutch, self.micro_clutch,
                       cfg.teleop_macro, cfg.teleop_micro,
                       self.flange_pose(), self.micro_pose_flange())
        self.macro_clutch = routed.macro_state
        self.micro_clutch = routed.micro_state

        if routed.macro_target is not None:
            res = arm_ik(cfg.dh, routed.macro_target,
                         ArmConfig(joints=tuple(self.arm_q)),
                         opts=self._opts, limits=cfg.arm_limits())
            self.arm_q = np.asarray(res.joints, dtype=float)
            if not res.converged:
                self.ik_rejections_macro += 1

        if routed.micro_target is not None:
            # track() works in the flange frame; IK solves in the snake base
            target = cfg.flange_offset.inverse() @ routed.micro_target
            res = iterate_dls(_snake_eval(cfg.snake), target,
                              self.snake_q.as_array(),
                              lambda q: clamp_config(cfg.snake, q),
                              self._micro_opts)
            # best-so-far never scores worse than the seed, so a partial
            # move toward the target is always safe to apply
            self.snake_q = SnakeConfig(angles=tuple(float(v)
                                                    for v in res.joints))
            if not res.converged:
                self.ik_rejections_micro += 1
            self._command_pulleys()

        frame = self._record(sample, routed.macro_target,
                             routed.micro_target)
        self.tick += 1
        self.clock.advance(1.0 / cfg.rates.control_hz)
        return frame

    def _command_pulleys(self) -> None:
        tendons = joints_to_tendons(self.cfg.snake, self.snake_q)
        cmd = tendons_to_actuators(self.cfg.snake, tendons)
        reply = self._client.set_angles(cmd.pulley_angles)
        if not reply.startswith("ACK"):
            log.warning("servo command rejected: %s", reply)

    def _record(self, sample: StylusSample, macro_target: Pose | None,
                micro_target: Pose | None) -> SimFrame:
        # the recorder recomputes the kinematic chain from the joint state
        # instead of trusting any cached pose
        flange = arm_fk(self.cfg.dh, ArmConfig(joints=tuple(self.arm_q)))
        tip_world = flange @ self.cfg.flange_offset @ snake_fk(
            self.cfg.snake, self.snake_q)
        if self._client is not None:
            self._last_pulleys = tuple(self._client.get_positions())
        return SimFrame(
            t=self.tick / self.cfg.rates.control_hz,
            stylus=sample,
            macro_joints=tuple(float(v) for v in self.arm_q),
            snake_angles=self.snake_q.angles,
            flange_pose=flange,
            tip_pose=tip_world,
            macro_engaged=self.macro_clutch.engaged,
            micro_engaged=self.micro_clutch.engaged,
            pulley_angles=self._last_pulleys,
            macro_target=macro_target,
            micro_target=micro_target,
        )


def run(cfg: SystemConfig, scenario: Scenario, seed: int = 0) -> RunResult:
    """Execute a scripted scenario; returns the recorded frames."""
    rates = cfg.rates
    ticks = round(scenario.duration * rates.control_hz)
    m = rates.samples_per_tick
    frames: list[SimFrame] = []
    with Simulation(cfg, scenario, seed) as sim:
        for k in range(ticks):
            # stylus samples published during this control period; the
            # controller acts on the latest one
            base = k * m
            latest = scenario.sample_at((base + m - 1) / rates.stylus_hz)
            sim.stylus_samples += m
            frame = sim.step(latest)
            if rates.record_at(k):
                frames.append(frame)
        return RunResult(frames=frames, ticks=ticks,
                         stylus_samples=sim.stylus_samples,
                         ik_rejections_macro=sim.ik_rejections_macro,
                         ik_rejections_micro=sim.ik_rejections_micro,
                         scenario_name=scenario.name, seed=seed)
