"""Wall-clock simulation driven by a telemetry client instead of a script.

A pacing thread advances the control loop at control_hz using the latest
stylus message received over the wire; the newest recorded frame is held
as an immutable snapshot for the telemetry sender. Losing the operator's
connection disengages both clutches (dead-man behaviour).
"""

from __future__ import annotations

import dataclasses
import logging
import threading
import time

from .config import SystemConfig
from .geometry import Pose
from .sim import SimFrame, Simulation
from .teleop import ClutchState, StylusSample

log = logging.getLogger(__name__)


class LiveSim:
    """Thread-owning wrapper around Simulation for interactive use."""

    def __init__(self, cfg: SystemConfig):
        self.cfg = cfg
        self.sim = Simulation(cfg)
        self._lock = threading.Lock()
        self._latest_input: StylusSample | None = None
        self._disengage_requested = False
        self._snapshot: SimFrame | None = None
        self._frames: list[SimFrame] = []
        self._running = threading.Event()
        self._thread: threading.Thread | None = None
        self.error_count = 0
        # rising button edges are latched until a control tick consumes
        # them, so a short press can never vanish between ticks
        self._prev_white = False
        self._prev_grey = False
        self._pulse_white = False
        self._pulse_grey = False

    # input side ------------------------------------------------------------

    def submit_stylus(self, sample: StylusSample) -> None:
        with self._lock:
            if sample.white_button and not self._prev_white:
                self._pulse_white = True
            if sample.grey_button and not self._prev_grey:
                self._pulse_grey = True
            self._prev_white = sample.white_button
            self._prev_grey = sample.grey_button
            self._latest_input = sample

    def update_scales(self, module: str, translation_scale=None,
                      rotation_scale=None) -> None:
        with self._lock:
            key = "teleop_macro" if module == "macro" else "teleop_micro"
            params = getattr(self.cfg, key)
            updates = {}
            if translation_scale is not None:
                updates["translation_scale"] = float(translation_scale)
            if rotation_scale is not None:
                updates["rotation_scale"] = float(rotation_scale)
            cfg = dataclasses.replace(
                self.cfg, **{key: dataclasses.replace(params, **updates)})
            self.cfg = cfg
            self.sim.cfg = cfg

    def disengage_all(self) -> None:
        """Dead-man: drop both clutches at the next tick."""
        with self._lock:
            self._disengage_requested = True

    # output side -----------------------------------------------------------

    def snapshot(self) -> SimFrame | None:
        with self._lock:
            return self._snapshot

    def frames(self) -> list[SimFrame]:
        with self._lock:
            return list(self._frames)

    # loop ------------------------------------------------------------------

    def start(self) -> "LiveSim":
        self.sim.start()
        self._running.set()
        self._thread = threading.Thread(target=self._loop, name="live-sim",
                                        daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        self._running.clear()
        if self._thread is not None:
            self._thread.join(timeout=5.0)
        self.sim.close()

    def __enter__(self) -> "LiveSim":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()

    def _loop(self) -> None:
        period = 1.0 / self.cfg.rates.control_hz
        next_tick = time.monotonic()
        last = StylusSample(pose=Pose.identity(), timestamp=0.0)
        while self._running.is_set():
            with self._lock:
                if self._disengage_requested:
                    self.sim.macro_clutch = ClutchState(
                        button_down=self.sim.macro_clutch.button_down)
                    self.sim.micro_clutch = ClutchState(
                        button_down=self.sim.micro_clutch.button_down)
                    self._disengage_requested = False
                if self._latest_input is not None:
                    last = self._latest_input
                white = last.white_button or self._pulse_white
                grey = last.grey_button or self._pulse_grey
                self._pulse_white = False
                self._pulse_grey = False
            sample = dataclasses.replace(
                last, timestamp=self.sim.tick * period,
                white_button=white, grey_button=grey)
            try:
                frame = self.sim.step(sample)
            except Exception:
                log.exception("live step failed")
                self.error_count += 1
                frame = None
            if frame is not None:
                with self._lock:
                    self._snapshot = frame
                    if self.cfg.rates.record_at(self.sim.tick - 1):
                        self._frames.append(frame)
            next_tick += period
            delay = next_tick - time.monotonic()
            if delay > 0:
                time.sleep(delay)
            else:
                next_tick = time.monotonic()  # fell behind: skip, don't spiral
