"""Trace files: newline-delimited JSON with a header and end marker.

Layout: the first line is a header record carrying the config hash and
run metadata, each following line is one frame, and the final line is an
end record with the frame count, which is how truncation is detected.
Floats are serialised with Python's shortest round-trip repr, so two
identical runs produce byte-identical files.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .errors import TraceError
from .geometry import Pose
from .sim import RunResult, SimFrame
from .teleop import StylusSample

SCHEMA = "macromicro.trace"
VERSION = 1


def _pose_rec(p: Pose | None) -> dict | None:
    return None if p is None else p.as_dict()


def _frame_rec(f: SimFrame) -> dict:
    return {
        "t": f.t,
        "stylus": {
            "pos": [float(v) for v in f.stylus.pose.t],
            "quat": [float(v) for v in f.stylus.pose.q],
            "white": f.stylus.white_button,
            "grey": f.stylus.grey_button,
            "ts": f.stylus.timestamp,
        },
        "macro_joints": list(f.macro_joints),
        "snake_config": list(f.snake_angles),
        "flange_pose": _pose_rec(f.flange_pose),
        "tip_pose": _pose_rec(f.tip_pose),
        "clutches": {"macro": f.macro_engaged, "micro": f.micro_engaged},
        "pulley_angles": list(f.pulley_angles),
        "macro_target": _pose_rec(f.macro_target),
        "micro_target": _pose_rec(f.micro_target),
    }


def _vector(rec: dict, key: str, size: int, index: int) -> tuple:
    val = rec.get(key)
    if (not isinstance(val, list) or len(val) != size
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool)
                       for v in val)):
        raise TraceError(f"frame {index}: field {key!r} must be a "
                         f"{size}-vector", frame_index=index)
    return tuple(float(v) for v in val)


def _pose_from(rec, key: str, index: int, optional: bool = False
               ) -> Pose | None:
    val = rec.get(key)
    if val is None:
        if optional:
            return None
        raise TraceError(f"frame {index}: missing pose {key!r}",
                         frame_index=index)
    try:
        return Pose.from_dict(val)
    except (KeyError, TypeError, ValueError) as exc:
        raise TraceError(f"frame {index}: bad pose {key!r}: {exc}",
                         frame_index=index) from exc


def _frame_from(rec: dict, index: int) -> SimFrame:
    if not isinstance(rec, dict):
        raise TraceError(f"frame {index}: not an object", frame_index=index)
    try:
        sty = rec["stylus"]
        clutches = rec["clutches"]
        t = float(rec["t"])
    except (KeyError, TypeError, ValueError) as exc:
        raise TraceError(f"frame {index}: {exc}", frame_index=index) from exc
    stylus = StylusSample(
        pose=Pose(q=np.asarray(_vector(sty, "quat", 4, index)),
                  t=np.asarray(_vector(sty, "pos", 3, index))),
        white_button=bool(sty.get("white", False)),
        grey_button=bool(sty.get("grey", False)),
        timestamp=float(sty.get("ts", t)),
    )
    return SimFrame(
        t=t,
        stylus=stylus,
        macro_joints=_vector(rec, "macro_joints", 6, index),
        snake_angles=_vector(rec, "snake_config", 4, index),
        flange_pose=_pose_from(rec, "flange_pose", index),
        tip_pose=_pose_from(rec, "tip_pose", index),
        macro_engaged=bool(clutches.get("macro", False)),
        micro_engaged=bool(clutches.get("micro", False)),
        pulley_angles=_vector(rec, "pulley_angles", 4, index),
        macro_target=_pose_from(rec, "macro_target", index, optional=True),
        micro_target=_pose_from(rec, "micro_target", index, optional=True),
    )


def write_trace(path: str | Path, result: RunResult, config_digest: str,
                rates: dict | None = None) -> None:
    header = {
        "schema": SCHEMA,
        "version": VERSION,
        "scenario": result.scenario_name,
        "seed": result.seed,
        "config_sha256": config_digest,
        "ticks": result.ticks,
        "stylus_samples": result.stylus_samples,
        "ik_rejections": {"macro": result.ik_rejections_macro,
                          "micro": result.ik_rejections_micro},
    }
    if rates:
        header["rates"] = rates
    with Path(path).open("w") as fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for f in result.frames:
            fh.write(json.dumps(_frame_rec(f)) + "\n")
        fh.write(json.dumps({"end": True, "frames": len(result.frames)})
                 + "\n")


def read_header(path: str | Path) -> dict:
    with Path(path).open() as fh:
        line = fh.readline()
    try:
        header = json.loads(line)
    except json.JSONDecodeError as exc:
        raise TraceError(f"bad trace header: {exc}") from exc
    if not isinstance(header, dict) or header.get("schema") != SCHEMA:
        raise TraceError("not a trace file (missing schema marker)")
    return header


def replay(path: str | Path) -> Iterator[SimFrame]:
    """Yield validated frames in order; raises TraceError (with the frame
    index) on the first malformed or missing record."""
    p = Path(path)
    if not p.exists():
        raise TraceError(f"trace file not found: {p}")
    with p.open() as fh:
        header_line = fh.readline()
        if not header_line.strip():
            raise TraceError("empty trace file (no header)")
        try:
            header = json.loads(header_line)
        except json.JSONDecodeError as exc:
            raise TraceError(f"bad trace header: {exc}") from exc
        if not isinstance(header, dict) or header.get("schema") != SCHEMA:
            raise TraceError("not a trace file (missing schema marker)")
        index = 0
        ended = False
        for line in fh:
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise TraceError(f"frame {index}: invalid JSON: {exc}",
                                 frame_index=index) from exc
            if isinstance(rec, dict) and rec.get("end"):
                declared = rec.get("frames")
                if declared != index:
                    raise TraceError(
                        f"end marker declares {declared} frames, "
                        f"found {index}", frame_index=index)
                ended = True
                break
            yield _frame_from(rec, index)
            index += 1
        if not ended:
            raise TraceError(
                f"trace truncated after frame {index - 1}"
                if index else "trace truncated before any frame",
                frame_index=index)


def load_frames(path: str | Path) -> list[SimFrame]:
    return list(replay(path))


CSV_COLUMNS = "t,source,x,y,z,qw,qx,qy,qz"


def export_csv(frames: Iterable[SimFrame], path: str | Path) -> int:
    """Write the pose streams as delimited text, one row per frame and
    source (stylus, macro flange, micro tip, plus targets when engaged)."""

    def row(t: float, source: str, pose: Pose) -> str:
        nums = [t, *pose.t, *pose.q]
        return ",".join([repr(float(nums[0])), source]
                        + [repr(float(v)) for v in nums[1:]])

    count = 0
    with Path(path).open("w") as fh:
        fh.write(CSV_COLUMNS + "\n")
        for f in frames:
            fh.write(row(f.t, "stylus", f.stylus.pose) + "\n")
            fh.write(row(f.t, "macro", f.flange_pose) + "\n")
            fh.write(row(f.t, "micro", f.tip_pose) + "\n")
            count += 3
            if f.macro_target is not None:
                fh.write(row(f.t, "macro_target", f.macro_target) + "\n")
                count += 1
            if f.micro_target is not None:
                fh.write(row(f.t, "micro_target", f.micro_target) + "\n")
                count += 1
    return count
