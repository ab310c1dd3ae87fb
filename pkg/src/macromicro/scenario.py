"""Scripted stylus streams and scenario files.

A scenario is an initial robot state plus a stylus trajectory given as
waypoints; between waypoints the pose is interpolated (linear position,
spherical rotation) and button states hold their value until the next
waypoint, which is exactly how a sampled physical stylus stream looks.
Accepted formats: JSON (the native schema below) and CSV with columns
t,x,y,z,qw,qx,qy,qz,white,grey.
"""

from __future__ import annotations

import csv
import json
import math
from bisect import bisect_right
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ScenarioError
from .geometry import Pose, quat_slerp
from .teleop import StylusSample


@dataclass(frozen=True)
class Scenario:
    name: str
    duration: float
    waypoints: tuple[StylusSample, ...]
    initial_arm_joints: tuple[float, ...] = (0.0, -math.pi / 2, math.pi / 2,
                                             -math.pi / 2, -math.pi / 2, 0.0)
    initial_snake_angles: tuple[float, float, float, float] = (0.0,) * 4

    def __post_init__(self):
        if self.duration <= 0:
            raise ScenarioError("duration must be positive")
        if not self.waypoints:
            raise ScenarioError("scenario needs at least one stylus waypoint")
        times = [w.timestamp for w in self.waypoints]
        if any(b < a for a, b in zip(times, times[1:])):
            raise ScenarioError("waypoint timestamps must be non-decreasing")
        if len(self.initial_arm_joints) != 6:
            raise ScenarioError("initial_arm_joints needs 6 entries")
        if len(self.initial_snake_angles) != 4:
            raise ScenarioError("initial_snake_angles needs 4 entries")
        object.__setattr__(self, "_times", tuple(times))

    def sample_at(self, t: float) -> StylusSample:
        """Stylus state at time t: pose interpolated, buttons held."""
        wps = self.waypoints
        times = self._times
        if t <= times[0]:
            w = wps[0]
            return StylusSample(pose=w.pose, white_button=w.white_button,
                                grey_button=w.grey_button, timestamp=t)
        if t >= times[-1]:
            w = wps[-1]
            return StylusSample(pose=w.pose, white_button=w.white_button,
                                grey_button=w.grey_button, timestamp=t)
        hi = bisect_right(times, t)
        lo = hi - 1
        a, b = wps[lo], wps[hi]
        span = times[hi] - times[lo]
        u = 0.0 if span <= 0 else (t - times[lo]) / span
        pose = Pose(q=quat_slerp(a.pose.q, b.pose.q, u),
                    t=(1 - u) * a.pose.t + u * b.pose.t)
        return StylusSample(pose=pose, white_button=a.white_button,
                            grey_button=a.grey_button, timestamp=t)


def _sample_from_dict(d: dict, index: int) -> StylusSample:
    try:
        pose = Pose(q=np.asarray(d.get("quat", (1.0, 0.0, 0.0, 0.0)),
                                 dtype=float),
                    t=np.asarray(d["pos"], dtype=float))
        return StylusSample(pose=pose,
                            white_button=bool(d.get("white", False)),
                            grey_button=bool(d.get("grey", False)),
                            timestamp=float(d["t"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"bad stylus waypoint {index}: {exc}") from exc


def scenario_from_dict(doc: dict) -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioError("scenario document must be a JSON object")
    try:
        waypoints = tuple(_sample_from_dict(w, i)
                          for i, w in enumerate(doc["stylus"]))
        initial = doc.get("initial", {})
        return Scenario(
            name=str(doc.get("name", "unnamed")),
            duration=float(doc["duration_s"]),
            waypoints=waypoints,
            initial_arm_joints=tuple(
                float(v) for v in initial.get(
                    "arm_joints",
                    (0.0, -math.pi / 2, math.pi / 2, -math.pi / 2,
                     -math.pi / 2, 0.0))),
            initial_snake_angles=tuple(
                float(v) for v in initial.get("snake_angles", (0.0,) * 4)),
        )
    except ScenarioError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"malformed scenario: {exc}") from exc


def scenario_to_dict(s: Scenario) -> dict:
    return {
        "name": s.name,
        "duration_s": s.duration,
        "initial": {
            "arm_joints": list(s.initial_arm_joints),
            "snake_angles": list(s.initial_snake_angles),
        },
        "stylus": [
            {
                "t": w.timestamp,
                "pos": [float(v) for v in w.pose.t],
                "quat": [float(v) for v in w.pose.q],
                "white": w.white_button,
                "grey": w.grey_button,
            }
            for w in s.waypoints
        ],
    }


def _scenario_from_csv(path: Path) -> Scenario:
    waypoints = []
    truthy = {"1", "true", "yes"}
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        needed = {"t", "x", "y", "z", "qw", "qx", "qy", "qz", "white", "grey"}
        if reader.fieldnames is None or not needed.issubset(reader.fieldnames):
            raise ScenarioError(
                f"stylus CSV needs columns {sorted(needed)}")
        for i, row in enumerate(reader):
            try:
                pose = Pose(q=np.array([float(row["qw"]), float(row["qx"]),
                                        float(row["qy"]), float(row["qz"])]),
                            t=np.array([float(row["x"]), float(row["y"]),
                                        float(row["z"])]))
                waypoints.append(StylusSample(
                    pose=pose,
                    white_button=row["white"].strip().lower() in truthy,
                    grey_button=row["grey"].strip().lower() in truthy,
                    timestamp=float(row["t"])))
            except (TypeError, ValueError) as exc:
                raise ScenarioError(f"bad stylus CSV row {i}: {exc}") from exc
    if not waypoints:
        raise ScenarioError("stylus CSV has no rows")
    return Scenario(name=path.stem, duration=waypoints[-1].timestamp,
                    waypoints=tuple(waypoints))


def load_scenario(path: str | Path) -> Scenario:
    p = Path(path)
    if not p.exists():
        raise ScenarioError(f"scenario file not found: {p}")
    if p.suffix.lower() == ".csv":
        return _scenario_from_csv(p)
    try:
        doc = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario is not valid JSON: {exc}") from exc
    return scenario_from_dict(doc)


def save_scenario(s: Scenario, path: str | Path) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(s), indent=2) + "\n")


# ---------------------------------------------------------------------------
# bundled scenario builders

def square_scenario(side: float = 40.0, settle: float = 0.5,
                    edge_time: float = 1.5) -> Scenario:
    """Macro-only scenario: engage the white clutch, trace a square in the
    stylus x-y plane, disengage."""
    t = settle
    corners = [(0.0, 0.0), (side, 0.0), (side, side), (0.0, side), (0.0, 0.0)]
    wps = [
        StylusSample(pose=Pose.identity(), timestamp=0.0),
        StylusSample(pose=Pose.identity(), white_button=True,
                     timestamp=0.05),
        StylusSample(pose=Pose.identity(), white_button=False,
                     timestamp=0.25),
    ]
    for x, y in corners:
        wps.append(StylusSample(pose=Pose.from_translation((x, y, 0.0)),
                                timestamp=t))
        t += edge_time
    t -= edge_time
    wps.append(StylusSample(pose=Pose.from_translation((0.0, 0.0, 0.0)),
                            white_button=True, timestamp=t + 0.2))
    wps.append(StylusSample(pose=Pose.from_translation((0.0, 0.0, 0.0)),
                            white_button=False, timestamp=t + 0.4))
    return Scenario(name="square", duration=t + 0.6, waypoints=tuple(wps))


def line_scenario(white: bool = False, grey: bool = True,
                  name: str = "micro_line") -> Scenario:
    """Diagonal straight-line sweep with a gentle rotation, sized so the
    micro module's scaled copy stays inside its lateral workspace. The
    snake starts pre-bent to keep the commanded path interior."""
    reach = np.array([20.0, -12.0, -10.0])
    tilt = 0.08
    wps = [
        StylusSample(pose=Pose.identity(), timestamp=0.0),
        StylusSample(pose=Pose.identity(), white_button=white,
                     grey_button=grey, timestamp=0.05),
        StylusSample(pose=Pose.identity(), timestamp=0.25),
        StylusSample(pose=Pose.from_axis_angle((0, 1, 0), tilt / 2,
                                               tuple(reach / 2)),
                     timestamp=1.5),
        StylusSample(pose=Pose.from_axis_angle((0, 1, 0), tilt,
                                               tuple(reach)),
                     timestamp=2.75),
    ]
    return Scenario(name=name, duration=3.0, waypoints=tuple(wps),
                    initial_snake_angles=(0.2, 0.1, 0.8, 0.3))


def dual_scenario() -> Scenario:
    """Both clutches engaged on the same sweep as line_scenario: ten
    commanded degrees of freedom active simultaneously."""
    base = line_scenario(white=True, grey=True, name="dual")
    return base


def hold_scenario(duration: float = 2.0) -> Scenario:
    """No buttons, no motion commands: the robot must stay put."""
    wps = (
        StylusSample(pose=Pose.identity(), timestamp=0.0),
        StylusSample(pose=Pose.from_translation((25.0, -10.0, 5.0)),
                     timestamp=duration),
    )
    return Scenario(name="hold", duration=duration, waypoints=wps)
