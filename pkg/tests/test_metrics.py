"""Metric tests; the Frechet oracle is the recursive coupling-measure
definition with memoisation, independent of the row-sweep DP."""

from functools import lru_cache

import numpy as np
import pytest

from macromicro.geometry import Pose
from macromicro.metrics import (EvaluationError, TrackingReport,
                                discrete_frechet, evaluate)
from macromicro.sim import SimFrame
from macromicro.teleop import StylusSample


def frechet_oracle(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)

    @lru_cache(maxsize=None)
    def c(i: int, j: int) -> float:
        d = float(np.linalg.norm(a[i] - b[j]))
        if i == 0 and j == 0:
            return d
        if i == 0:
            return max(c(0, j - 1), d)
        if j == 0:
            return max(c(i - 1, 0), d)
        return max(min(c(i - 1, j), c(i - 1, j - 1), c(i, j - 1)), d)

    return c(len(a) - 1, len(b) - 1)


def test_frechet_identical_paths_zero():
    path = np.array([[0.0, 0, 0], [1, 0, 0], [2, 1, 0]])
    assert discrete_frechet(path, path) == 0.0


def test_frechet_textbook_example():
    a = np.array([[2.0, 2], [2, 3], [2, 5]])
    b = np.array([[2.0, 2], [2, 4], [2, 5]])
    want = frechet_oracle(a, b)
    assert discrete_frechet(a, b) == pytest.approx(want, abs=1e-12)
    assert want == 1.0


def test_frechet_matches_oracle_random(rng):
    for _ in range(40):
        n, m = rng.integers(2, 12, size=2)
        a = rng.normal(size=(n, 3))
        b = rng.normal(size=(m, 3))
        assert discrete_frechet(a, b) == pytest.approx(
            frechet_oracle(a, b), abs=1e-12)


def test_frechet_lower_bound_endpoints(rng):
    a = rng.normal(size=(20, 3))
    b = rng.normal(size=(17, 3))
    lower = max(np.linalg.norm(a[0] - b[0]), np.linalg.norm(a[-1] - b[-1]))
    assert discrete_frechet(a, b) >= lower - 1e-12


def test_frechet_constant_offset():
    a = np.cumsum(np.ones((30, 3)), axis=0)
    b = a + np.array([0.0, 2.5, 0.0])
    assert discrete_frechet(a, b) == pytest.approx(2.5, abs=1e-12)


# ---------------------------------------------------------------------------
# evaluate over synthetic frames

IDLE = StylusSample(pose=Pose.identity())


def make_frame(t, flange: Pose, macro_target: Pose | None = None,
               micro_local: Pose | None = None,
               micro_target: Pose | None = None) -> SimFrame:
    tip = flange @ (micro_local or Pose.from_translation((0, 0, 270.0)))
    return SimFrame(
        t=t, stylus=IDLE,
        macro_joints=(0.0,) * 6,
        snake_angles=(0.0,) * 4,
        flange_pose=flange,
        tip_pose=tip,
        macro_engaged=macro_target is not None,
        micro_engaged=micro_target is not None,
        pulley_angles=(0.0,) * 4,
        macro_target=macro_target,
        micro_target=micro_target,
    )


def test_zero_motion_zero_errors():
    flange = Pose.from_translation((100.0, 0.0, 300.0))
    frames = [make_frame(k * 0.01, flange, macro_target=flange)
              for k in range(50)]
    rep = evaluate(frames, "macro")
    assert rep.rms_position_error == 0.0
    assert rep.max_position_error == 0.0
    assert rep.discrete_frechet == 0.0
    assert rep.per_axis_rms == (0.0, 0.0, 0.0)
    assert rep.frames_evaluated == 50


def test_exact_tracking_is_zero_error():
    frames = []
    for k in range(40):
        flange = Pose.from_translation((k * 1.0, 2.0 * k, 0.0))
        frames.append(make_frame(k * 0.01, flange, macro_target=flange))
    rep = evaluate(frames, "macro")
    assert rep.rms_position_error == 0.0
    assert rep.discrete_frechet == 0.0


def test_constant_offset_statistics():
    frames = []
    offset = np.array([0.6, -0.8, 0.0])   # norm 1.0
    for k in range(30):
        flange = Pose.from_translation((k * 1.0, 0.0, 0.0))
        target = Pose.from_translation(flange.t + offset)
        frames.append(make_frame(k * 0.01, flange, macro_target=target))
    rep = evaluate(frames, "macro")
    assert rep.rms_position_error == pytest.approx(1.0, abs=1e-12)
    assert rep.max_position_error == pytest.approx(1.0, abs=1e-12)
    assert rep.discrete_frechet == pytest.approx(1.0, abs=1e-12)
    assert rep.per_axis_rms[0] == pytest.approx(0.6, abs=1e-12)
    assert rep.per_axis_rms[1] == pytest.approx(0.8, abs=1e-12)
    assert rep.max_position_error >= rep.rms_position_error


def test_micro_error_measured_in_flange_frame(rng):
    # a wild flange pose must not leak into the micro report
    frames = []
    for k in range(20):
        flange = Pose.from_axis_angle(rng.normal(size=3),
                                      rng.uniform(0, 3),
                                      rng.normal(scale=400, size=3))
        local = Pose.from_translation((1.0 * k, 0.0, 260.0))
        target = Pose.from_translation((1.0 * k + 0.3, 0.0, 260.0))
        frames.append(make_frame(k * 0.01, flange, micro_local=local,
                                 micro_target=target))
    rep = evaluate(frames, "micro")
    assert rep.rms_position_error == pytest.approx(0.3, abs=1e-9)


def test_disengaged_frames_excluded():
    flange = Pose.from_translation((10.0, 0.0, 0.0))
    frames = [make_frame(k * 0.01, flange) for k in range(10)]
    frames += [make_frame(0.2 + k * 0.01, flange, macro_target=flange)
               for k in range(10)]
    rep = evaluate(frames, "macro")
    assert rep.frames_evaluated == 10
    assert rep.frames_total == 20


def test_no_engaged_interval_raises():
    flange = Pose.from_translation((10.0, 0.0, 0.0))
    frames = [make_frame(k * 0.01, flange) for k in range(10)]
    with pytest.raises(EvaluationError, match="engaged"):
        evaluate(frames, "macro")


def test_report_invariant_enforced():
    with pytest.raises(ValueError):
        TrackingReport(module="macro", rms_position_error=2.0,
                       max_position_error=1.0, discrete_frechet=0.0,
                       per_axis_rms=(0, 0, 0), rms_rotation_error_deg=0.0,
                       frames_evaluated=2, frames_total=2, stylus_samples=0)


def test_figures_render(tmp_path):
    frames = []
    for k in range(25):
        flange = Pose.from_translation((k * 1.0, k * 0.5, 0.0))
        target = Pose.from_translation(flange.t + [0.1, 0.0, 0.0])
        frames.append(make_frame(k * 0.01, flange, macro_target=target))
    rep = evaluate(frames, "macro")
    from macromicro.plotting import render_report_figures
    paths = render_report_figures(frames, "macro", rep, tmp_path)
    for p in paths:
        assert p.exists() and p.stat().st_size > 10_000
