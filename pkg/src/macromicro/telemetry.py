"""WebSocket telemetry: state stream out, stylus and parameter messages in.

JSON messages (one object per WebSocket text frame):

  outbound  {"type": "state", "t": s, "macro_joints": [6], "snake_config":
             [4], "flange_pose": pose, "tip_pose": pose, "clutches":
             {"macro": bool, "micro": bool}, "pulley_angles": [4],
             "stylus": {...}, "arm_points": [[xyz] x 7],
             "snake_points": [[xyz] x K], "scales": {...}, "errors": n}
  inbound   {"type": "stylus", "pos": [3], "quat": [4], "white": bool,
             "grey": bool}
  inbound   {"type": "params", "module": "macro"|"micro",
             "translation_scale": f?, "rotation_scale": f?}

Malformed inbound messages are counted and ignored; the connection stays
open. When a client disconnects both clutches disengage.
"""

from __future__ import annotations

import json
import logging
import threading
import time

import numpy as np
from websockets.sync.server import serve as ws_serve

from .arm import ArmConfig, arm_link_points
from .geometry import Pose
from .live import LiveSim
from .sim import SimFrame
from .snake import SnakeConfig, snake_backbone
from .teleop import StylusSample

log = logging.getLogger(__name__)

STATE_HZ = 100.0


def state_message(sim: LiveSim, frame: SimFrame) -> dict:
    cfg = sim.cfg
    arm_pts = arm_link_points(cfg.dh, ArmConfig(joints=frame.macro_joints))
    spine_local = snake_backbone(cfg.snake,
                                 SnakeConfig(angles=frame.snake_angles))
    mount = frame.flange_pose @ cfg.flange_offset
    rot = mount.rotation_matrix()
    spine_world = spine_local @ rot.T + mount.t
    return {
        "type": "state",
        "t": frame.t,
        "macro_joints": list(frame.macro_joints),
        "snake_config": list(frame.snake_angles),
        "flange_pose": frame.flange_pose.as_dict(),
        "tip_pose": frame.tip_pose.as_dict(),
        "clutches": {"macro": frame.macro_engaged,
                     "micro": frame.micro_engaged},
        "pulley_angles": list(frame.pulley_angles),
        "stylus": {
            "pos": [float(v) for v in frame.stylus.pose.t],
            "quat": [float(v) for v in frame.stylus.pose.q],
            "white": frame.stylus.white_button,
            "grey": frame.stylus.grey_button,
        },
        "arm_points": [[float(v) for v in p] for p in arm_pts],
        "snake_points": [[float(v) for v in p] for p in spine_world],
        "scales": {
            "macro": {"translation": cfg.teleop_macro.translation_scale,
                      "rotation": cfg.teleop_macro.rotation_scale},
            "micro": {"translation": cfg.teleop_micro.translation_scale,
                      "rotation": cfg.teleop_micro.rotation_scale},
        },
        "errors": sim.error_count,
    }


def _apply_inbound(sim: LiveSim, text: str) -> None:
    try:
        msg = json.loads(text)
        kind = msg["type"]
        if kind == "stylus":
            pose = Pose(q=np.asarray(msg.get("quat", (1, 0, 0, 0)),
                                     dtype=float),
                        t=np.asarray(msg["pos"], dtype=float))
            sim.submit_stylus(StylusSample(
                pose=pose,
                white_button=bool(msg.get("white", False)),
                grey_button=bool(msg.get("grey", False)),
                timestamp=time.monotonic()))
        elif kind == "params":
            sim.update_scales(
                "macro" if msg.get("module") == "macro" else "micro",
                translation_scale=msg.get("translation_scale"),
                rotation_scale=msg.get("rotation_scale"))
        else:
            raise ValueError(f"unknown message type {kind!r}")
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        sim.error_count += 1
        log.debug("ignoring malformed inbound message: %s", exc)


class TelemetryServer:
    """One WebSocket endpoint bound to a LiveSim."""

    def __init__(self, sim: LiveSim, host: str = "127.0.0.1", port: int = 0):
        self.sim = sim
        self._server = ws_serve(self._handle, host, port)
        self.address = self._server.socket.getsockname()
        self._thread: threading.Thread | None = None

    def start(self) -> "TelemetryServer":
        self._thread = threading.Thread(target=self._server.serve_forever,
                                        name="telemetry", daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        self._server.shutdown()
        if self._thread is not None:
            self._thread.join(timeout=5.0)

    def __enter__(self) -> "TelemetryServer":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()

    def _handle(self, conn) -> None:
        stop = threading.Event()

        def sender() -> None:
            period = 1.0 / STATE_HZ
            last_t = None
            while not stop.is_set():
                frame = self.sim.snapshot()
                if frame is not None and frame.t != last_t:
                    last_t = frame.t
                    try:
                        conn.send(json.dumps(state_message(self.sim, frame)))
                    except Exception:
                        return
                time.sleep(period)

        tx = threading.Thread(target=sender, daemon=True)
        tx.start()
        try:
            for text in conn:
                if isinstance(text, bytes):
                    self.sim.error_count += 1
                    continue
                _apply_inbound(self.sim, text)
        except Exception:
            pass
        finally:
            stop.set()
            tx.join(timeout=2.0)
            # dead-man: operator channel lost
            self.sim.disengage_all()
