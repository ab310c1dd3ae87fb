"""TCP service applying protocol frames to the servo bank.

One client is served at a time. Servo positions advance lazily on the
injected clock: whenever a frame arrives the bank is stepped by the time
elapsed since the previous step, so the emulator runs identically under a
simulated clock (tests, deterministic runs) and the wall clock (live
mode). On disconnect the bank freezes at the last stepped positions.
"""

from __future__ import annotations

import socket
import threading
import time

from . import protocol
from .errors import ProtocolError
from .protocol import ServoBank


class WallClock:
    def now(self) -> float:
        return time.monotonic()


class SimClock:
    """Manually advanced clock for deterministic runs."""

    def __init__(self, start: float = 0.0):
        self._t = float(start)
        self._lock = threading.Lock()

    def now(self) -> float:
        with self._lock:
            return self._t

    def advance(self, dt: float) -> None:
        if dt < 0:
            raise ValueError("cannot rewind the clock")
        with self._lock:
            self._t += dt


class ServoServer:
    """Line-oriented TCP front end for a ServoBank."""

    def __init__(self, bank: ServoBank, clock=None, host: str = "127.0.0.1",
                 port: int = 0):
        self.bank = bank
        self.clock = clock if clock is not None else WallClock()
        self._listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._listener.bind((host, port))
        self._listener.listen(1)
        self.address = self._listener.getsockname()
        self._thread: threading.Thread | None = None
        self._stop = threading.Event()
        self._last_step: float | None = None

    def start(self) -> "ServoServer":
        self._thread = threading.Thread(target=self._accept_loop,
                                        name="servo-server", daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        self._stop.set()
        try:
            self._listener.close()
        except OSError:
            pass
        if self._thread is not None:
            self._thread.join(timeout=5.0)

    def __enter__(self) -> "ServoServer":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()

    # internal ------------------------------------------------------------

    def _accept_loop(self) -> None:
        while not self._stop.is_set():
            try:
                conn, _ = self._listener.accept()
            except OSError:
                return
            try:
                self._serve_client(conn)
            finally:
                conn.close()
                self.bank.freeze()

    def _step_to_now(self) -> None:
        now = self.clock.now()
        if self._last_step is not None and now > self._last_step:
            self.bank.step(now - self._last_step)
        self._last_step = now

    def _serve_client(self, conn: socket.socket) -> None:
        self._last_step = self.clock.now()
        last_seq = -1
        buf = b""
        while not self._stop.is_set():
            try:
                chunk = conn.recv(4096)
            except OSError:
                return
            if not chunk:
                return
            buf += chunk
            while b"\n" in buf:
                line, buf = buf.split(b"\n", 1)
                reply = self._handle_line(line + b"\n", last_seq)
                if reply[0]:
                    last_seq = reply[1]
                try:
                    conn.sendall(reply[2])
                except OSError:
                    return

    def _handle_line(self, raw: bytes, last_seq: int
                     ) -> tuple[bool, int, bytes]:
        """Returns (accepted, new_last_seq, reply bytes)."""
        try:
            frame = protocol.decode(raw)
        except ProtocolError as exc:
            return False, last_seq, protocol.encode_nack(0, str(exc))
        if frame.sequence <= last_seq:
            return False, last_seq, protocol.encode_nack(
                frame.sequence, "sequence not increasing")
        self._step_to_now()
        if frame.kind == protocol.SET:
            self.bank.set_targets(frame.angles)
            return True, frame.sequence, protocol.encode_ack(frame.sequence)
        if frame.kind == protocol.GET:
            return True, frame.sequence, protocol.encode_pos(
                frame.sequence, self.bank.positions)
        return True, frame.sequence, protocol.encode_ack(frame.sequence)


class ServoClient:
    """Blocking lockstep client: one request, one reply."""

    def __init__(self, address: tuple[str, int], timeout: float = 10.0):
        self._sock = socket.create_connection(address, timeout=timeout)
        self._buf = b""
        self._seq = 0

    def close(self) -> None:
        try:
            self._sock.close()
        except OSError:
            pass

    def __enter__(self) -> "ServoClient":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def _next_seq(self) -> int:
        self._seq += 1
        return self._seq

    def _roundtrip(self, data: bytes) -> str:
        self._sock.sendall(data)
        while b"\n" not in self._buf:
            chunk = self._sock.recv(4096)
            if not chunk:
                raise ConnectionError("servo server closed the connection")
            self._buf += chunk
        line, self._buf = self._buf.split(b"\n", 1)
        return line.decode("ascii")

    def set_angles(self, angles) -> str:
        frame = protocol.CommandFrame(kind=protocol.SET,
                                      sequence=self._next_seq(),
                                      angles=tuple(angles))
        return self._roundtrip(protocol.encode(frame))

    def get_positions(self) -> tuple[float, ...]:
        frame = protocol.CommandFrame(kind=protocol.GET,
                                      sequence=self._next_seq())
        reply = self._roundtrip(protocol.encode(frame))
        parts = reply.split(" ")
        if parts[0] != "POS":
            raise ProtocolError(f"unexpected reply {reply!r}")
        return tuple(float(p) for p in parts[2:])

    def ping(self) -> str:
        frame = protocol.CommandFrame(kind=protocol.PING,
                                      sequence=self._next_seq())
        return self._roundtrip(protocol.encode(frame))
