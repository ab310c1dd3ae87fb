"""System configuration: one JSON document feeding every module.

The snake geometry section mirrors the manipulator's published design
parameter names (n, w_mm, alpha_rad, d_mm per module) so a physical
parameter sheet drops in directly; everything else (arm DH table, teleop
scales, loop rates, protocol and solver knobs) lives beside it.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .arm import DHTable
from .errors import ConfigError
from .geometry import Pose
from .ik import IkOptions
from .snake import ModuleParams, SnakeDescriptor
from .teleop import TeleopParams


@dataclass(frozen=True)
class RateConfig:
    """Loop rates, Hz. The stylus rate must be an integer multiple of the
    control rate; the recorder may decimate fractionally (e.g. 100 -> 40)."""

    stylus_hz: int = 1000
    control_hz: int = 100
    recorder_hz: int = 100

    def __post_init__(self):
        if not (self.stylus_hz >= self.control_hz >= self.recorder_hz >= 1):
            raise ConfigError("rates must satisfy stylus >= control >= "
                              "recorder >= 1")
        if self.stylus_hz % self.control_hz != 0:
            raise ConfigError("stylus_hz must be an integer multiple of "
                              "control_hz")

    @property
    def samples_per_tick(self) -> int:
        return self.stylus_hz // self.control_hz

    def record_at(self, tick: int) -> bool:
        """Exact decimation: True when this control tick crosses a recorder
        period boundary. Over any whole number of seconds the recorded
        frame count is exactly recorder_hz per second."""
        r, c = self.recorder_hz, self.control_hz
        return (tick + 1) * r // c > tick * r // c


@dataclass(frozen=True)
class ProtocolConfig:
    host: str = "127.0.0.1"
    port: int = 0                  # 0: ephemeral, reported by the server
    max_speed: float = 6.1         # rad/s
    travel: float = math.pi / 2    # symmetric travel bound, rad

    def __post_init__(self):
        if not (self.max_speed > 0 and self.travel > 0):
            raise ConfigError("servo speed and travel must be positive")


@dataclass(frozen=True)
class SystemConfig:
    snake: SnakeDescriptor = field(default_factory=SnakeDescriptor.default)
    dh: DHTable = field(default_factory=DHTable.ur5e)
    arm_joint_limit: float = 2.0 * math.pi
    flange_offset: Pose = field(default_factory=Pose.identity)
    teleop_macro: TeleopParams = field(
        default_factory=lambda: TeleopParams(translation_scale=1.0))
    teleop_micro: TeleopParams = field(
        default_factory=lambda: TeleopParams(translation_scale=0.2))
    rates: RateConfig = field(default_factory=RateConfig)
    protocol: ProtocolConfig = field(default_factory=ProtocolConfig)
    ik: IkOptions = field(default_factory=IkOptions)
    # rotation-row weight used for the micro module inside the teleop loop,
    # where 6-DOF pose streams meet a 4-DOF tip (position takes priority)
    micro_rot_weight: float = 0.1

    def arm_limits(self) -> np.ndarray:
        return np.full(6, self.arm_joint_limit)


# ---------------------------------------------------------------------------
# serialisation

def _module_to_dict(m: ModuleParams) -> dict:
    return {
        "n": m.joint_count,
        "w_mm": m.width,
        "alpha_rad": m.half_angle,
        "d_mm": m.separation,
        "r_mm": m.radius,
        "axis_pattern": list(m.axis_pattern),
    }


def _module_from_dict(d: dict, where: str) -> ModuleParams:
    try:
        return ModuleParams(
            joint_count=int(d["n"]),
            width=float(d["w_mm"]),
            half_angle=float(d["alpha_rad"]),
            separation=float(d["d_mm"]),
            radius=float(d["r_mm"]) if d.get("r_mm") is not None else None,
            axis_pattern=tuple(d.get("axis_pattern", ())),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad module parameters in {where}: {exc}") from exc


def config_to_dict(cfg: SystemConfig) -> dict:
    return {
        "snake": {
            "proximal": _module_to_dict(cfg.snake.proximal),
            "distal": _module_to_dict(cfg.snake.distal),
            "inter_module_roll_rad": cfg.snake.inter_module_roll,
            "shaft_length_mm": cfg.snake.shaft_length,
            "segment_height_mm": cfg.snake.segment_height,
            "pulley_radius_mm": cfg.snake.pulley_radius,
            "pulley_travel_rad": cfg.snake.pulley_travel,
        },
        "arm": {
            "dh": [list(row) for row in cfg.dh.rows],
            "joint_limit_rad": cfg.arm_joint_limit,
            "flange_offset": cfg.flange_offset.as_dict(),
        },
        "teleop": {
            "macro": _teleop_to_dict(cfg.teleop_macro),
            "micro": _teleop_to_dict(cfg.teleop_micro),
        },
        "rates": {
            "stylus_hz": cfg.rates.stylus_hz,
            "control_hz": cfg.rates.control_hz,
            "recorder_hz": cfg.rates.recorder_hz,
        },
        "protocol": {
            "host": cfg.protocol.host,
            "port": cfg.protocol.port,
            "max_speed_rad_s": cfg.protocol.max_speed,
            "travel_rad": cfg.protocol.travel,
        },
        "ik": {
            "damping": cfg.ik.damping,
            "max_step_rad": cfg.ik.max_step,
            "pos_tol_mm": cfg.ik.pos_tol,
            "rot_tol_deg": cfg.ik.rot_tol_deg,
            "max_iters": cfg.ik.max_iters,
            "stall_window": cfg.ik.stall_window,
            "stall_ratio": cfg.ik.stall_ratio,
            "micro_rot_weight": cfg.micro_rot_weight,
        },
    }


def _teleop_to_dict(p: TeleopParams) -> dict:
    return {
        "translation_scale": p.translation_scale,
        "rotation_scale": p.rotation_scale,
        "frame_map_quat": list(p.frame_map),
        "hold_to_engage": p.hold_to_engage,
    }


def _teleop_from_dict(d: dict, where: str) -> TeleopParams:
    try:
        return TeleopParams(
            translation_scale=float(d.get("translation_scale", 1.0)),
            rotation_scale=float(d.get("rotation_scale", 1.0)),
            frame_map=tuple(d.get("frame_map_quat", (1.0, 0.0, 0.0, 0.0))),
            hold_to_engage=bool(d.get("hold_to_engage", False)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad teleop parameters in {where}: {exc}") from exc


def config_from_dict(doc: dict) -> SystemConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a JSON object")
    try:
        snake_d = doc.get("snake", {})
        defaults = SnakeDescriptor.default()
        snake = SnakeDescriptor(
            proximal=_module_from_dict(snake_d["proximal"], "snake.proximal")
            if "proximal" in snake_d else defaults.proximal,
            distal=_module_from_dict(snake_d["distal"], "snake.distal")
            if "distal" in snake_d else defaults.distal,
            inter_module_roll=float(
                snake_d.get("inter_module_roll_rad", math.pi / 4)),
            shaft_length=float(snake_d.get("shaft_length_mm", 250.0)),
            segment_height=float(snake_d.get("segment_height_mm", 2.0)),
            pulley_radius=float(snake_d.get("pulley_radius_mm", 10.0)),
            pulley_travel=float(snake_d.get("pulley_travel_rad", math.pi / 2)),
        )
        arm_d = doc.get("arm", {})
        dh = DHTable(rows=tuple(tuple(row) for row in arm_d["dh"])) \
            if "dh" in arm_d else DHTable.ur5e()
        flange = Pose.from_dict(arm_d["flange_offset"]) \
            if "flange_offset" in arm_d else Pose.identity()
        teleop_d = doc.get("teleop", {})
        rates_d = doc.get("rates", {})
        proto_d = doc.get("protocol", {})
        ik_d = doc.get("ik", {})
        return SystemConfig(
            snake=snake,
            dh=dh,
            arm_joint_limit=float(arm_d.get("joint_limit_rad", 2 * math.pi)),
            flange_offset=flange,
            teleop_macro=_teleop_from_dict(teleop_d.get("macro", {}),
                                           "teleop.macro"),
            teleop_micro=_teleop_from_dict(
                teleop_d.get("micro", {"translation_scale": 0.2}),
                "teleop.micro"),
            rates=RateConfig(
                stylus_hz=int(rates_d.get("stylus_hz", 1000)),
                control_hz=int(rates_d.get("control_hz", 100)),
                recorder_hz=int(rates_d.get("recorder_hz", 100)),
            ),
            protocol=ProtocolConfig(
                host=str(proto_d.get("host", "127.0.0.1")),
                port=int(proto_d.get("port", 0)),
                max_speed=float(proto_d.get("max_speed_rad_s", 6.1)),
                travel=float(proto_d.get("travel_rad", math.pi / 2)),
            ),
            ik=IkOptions(
                damping=float(ik_d.get("damping", 0.1)),
                max_step=float(ik_d.get("max_step_rad", 0.05)),
                pos_tol=float(ik_d.get("pos_tol_mm", 0.01)),
                rot_tol_deg=float(ik_d.get("rot_tol_deg", 0.1)),
                max_iters=int(ik_d.get("max_iters", 200)),
                stall_window=int(ik_d.get("stall_window", 12)),
                stall_ratio=float(ik_d.get("stall_ratio", 0.9)),
            ),
            micro_rot_weight=float(ik_d.get("micro_rot_weight", 0.1)),
        )
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed config: {exc}") from exc


def load_config(path: str | Path) -> SystemConfig:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    try:
        doc = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return config_from_dict(doc)


def save_config(cfg: SystemConfig, path: str | Path) -> None:
    Path(path).write_text(json.dumps(config_to_dict(cfg), indent=2) + "\n")


def config_digest(cfg: SystemConfig) -> str:
    """Stable content hash recorded in trace headers."""
    canonical = json.dumps(config_to_dict(cfg), sort_keys=True,
                           separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def default_config() -> SystemConfig:
    return SystemConfig()


def load_default_file() -> SystemConfig:
    """Default config as shipped in the package data."""
    text = resources.files("macromicro").joinpath(
        "data/default_config.json").read_text()
    return config_from_dict(json.loads(text))
