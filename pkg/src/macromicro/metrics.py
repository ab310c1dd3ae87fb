"""Tracking-quality metrics over recorded traces.

A module's tracking error compares the commanded target path (the scaled,
frame-mapped stylus motion captured in each frame) against the pose the
robot actually reached, over engaged intervals only. Reported: RMS and
max position error, per-axis RMS, and the discrete Frechet distance
between the two paths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import MacroMicroError
from .sim import SimFrame

# cap the Frechet dynamic program at this many points per path; longer
# paths are uniformly decimated first (the metric is defined this way)
FRECHET_MAX_POINTS = 2000


class EvaluationError(MacroMicroError):
    """No engaged interval to evaluate."""


@dataclass(frozen=True)
class TrackingReport:
    module: str
    rms_position_error: float        # mm
    max_position_error: float        # mm
    discrete_frechet: float          # mm
    per_axis_rms: tuple[float, float, float]
    rms_rotation_error_deg: float
    frames_evaluated: int
    frames_total: int
    stylus_samples: int

    def __post_init__(self):
        if self.max_position_error + 1e-12 < self.rms_position_error:
            raise ValueError("max error cannot be below RMS error")

    def as_dict(self) -> dict:
        return {
            "module": self.module,
            "rms_position_error_mm": self.rms_position_error,
            "max_position_error_mm": self.max_position_error,
            "discrete_frechet_mm": self.discrete_frechet,
            "per_axis_rms_mm": list(self.per_axis_rms),
            "rms_rotation_error_deg": self.rms_rotation_error_deg,
            "frames_evaluated": self.frames_evaluated,
            "frames_total": self.frames_total,
            "stylus_samples": self.stylus_samples,
        }


def discrete_frechet(path_a: np.ndarray, path_b: np.ndarray) -> float:
    """Discrete Frechet distance between two polylines (rows are points).

    Classic dynamic program: the coupling cost at (i, j) is the larger of
    the point distance and the cheapest predecessor.
    """
    a = np.atleast_2d(np.asarray(path_a, dtype=float))
    b = np.atleast_2d(np.asarray(path_b, dtype=float))
    if a.shape[0] == 0 or b.shape[0] == 0:
        raise ValueError("empty path")
    a = _decimate(a, FRECHET_MAX_POINTS)
    b = _decimate(b, FRECHET_MAX_POINTS)
    n, m = a.shape[0], b.shape[0]
    # pairwise distances, then row-by-row DP sweep
    diff = a[:, None, :] - b[None, :, :]
    d = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    prev = np.empty(m)
    prev[0] = d[0, 0]
    for j in range(1, m):
        prev[j] = max(prev[j - 1], d[0, j])
    cur = np.empty(m)
    for i in range(1, n):
        cur[0] = max(prev[0], d[i, 0])
        row = d[i]
        for j in range(1, m):
            cur[j] = max(min(prev[j], prev[j - 1], cur[j - 1]), row[j])
        prev, cur = cur, prev
    return float(prev[m - 1])


def _decimate(path: np.ndarray, limit: int) -> np.ndarray:
    if path.shape[0] <= limit:
        return path
    idx = np.linspace(0, path.shape[0] - 1, limit).round().astype(int)
    return path[idx]


def _engaged_pairs(frames: Sequence[SimFrame], module: str
                   ) -> tuple[np.ndarray, np.ndarray, np.ndarray, list[float]]:
    """(expected positions, achieved positions, times, rotation errors)."""
    expected, achieved, times, rot_err = [], [], [], []
    for f in frames:
        if module == "macro":
            engaged, target, actual = f.macro_engaged, f.macro_target, \
                f.flange_pose
        else:
            engaged, target = f.micro_engaged, f.micro_target
            actual = None
        if not engaged or target is None:
            continue
        if module == "micro":
            # micro targets live in the flange frame; compare against the
            # tip recomputed in that frame from the recorded chain
            actual = f.flange_pose.inverse() @ f.tip_pose
        expected.append(target.t)
        achieved.append(actual.t)
        times.append(f.t)
        rot_err.append(math.degrees(actual.rotation_error(target)))
    return (np.asarray(expected, dtype=float),
            np.asarray(achieved, dtype=float),
            np.asarray(times, dtype=float), rot_err)


def evaluate(frames: Sequence[SimFrame], module: str,
             stylus_samples: int = 0) -> TrackingReport:
    """Tracking report for one module over a recorded trace."""
    if module not in ("macro", "micro"):
        raise ValueError("module must be 'macro' or 'micro'")
    frames = list(frames)
    expected, achieved, _, rot_err = _engaged_pairs(frames, module)
    if expected.shape[0] < 2:
        raise EvaluationError(
            f"trace holds {expected.shape[0]} engaged {module} frames; "
            "need at least 2 to evaluate")
    err = achieved - expected
    dist = np.linalg.norm(err, axis=1)
    return TrackingReport(
        module=module,
        rms_position_error=float(np.sqrt(np.mean(dist ** 2))),
        max_position_error=float(np.max(dist)),
        discrete_frechet=discrete_frechet(expected, achieved),
        per_axis_rms=tuple(float(v) for v in
                           np.sqrt(np.mean(err ** 2, axis=0))),
        rms_rotation_error_deg=float(
            np.sqrt(np.mean(np.square(rot_err)))),
        frames_evaluated=int(expected.shape[0]),
        frames_total=len(frames),
        stylus_samples=stylus_samples,
    )


def report_csv(report: TrackingReport) -> str:
    d = report.as_dict()
    keys, vals = [], []
    for k, v in d.items():
        if isinstance(v, list):
            for i, item in enumerate(v):
                keys.append(f"{k}_{'xyz'[i]}")
                vals.append(repr(item))
        elif isinstance(v, float):
            keys.append(k)
            vals.append(repr(v))
        else:
            keys.append(k)
            vals.append(str(v))
    return ",".join(keys) + "\n" + ",".join(vals) + "\n"
