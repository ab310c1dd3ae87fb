"""ASCII line protocol for pulley angle commands, plus the servo model.

Grammar (newline-terminated, single spaces, angles fixed 6-decimal):

    SET <seq> <a1> <a2> <a3> <a4>\\n
    GET <seq>\\n
    PING <seq>\\n

Replies: "ACK <seq>\\n", "NACK <seq> <reason>\\n" and
"POS <seq> <a1> <a2> <a3> <a4>\\n". The angle resolution on the wire is
1e-6 rad; values quantised to that grid round-trip exactly.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, replace

from .errors import ProtocolError

SET = "SET"
GET = "GET"
PING = "PING"
_KINDS = (SET, GET, PING)

_SEQ_RE = re.compile(r"^\d+$")
_ANGLE_RE = re.compile(r"^-?\d+\.\d{6}$")


@dataclass(frozen=True)
class CommandFrame:
    """One inbound protocol message."""

    kind: str
    sequence: int
    angles: tuple[float, float, float, float] | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown frame kind {self.kind!r}")
        if self.sequence < 0:
            raise ValueError("sequence must be non-negative")
        if self.kind == SET:
            if self.angles is None or len(self.angles) != 4:
                raise ValueError("SET frames carry exactly 4 angles")
            object.__setattr__(self, "angles",
                               tuple(float(a) for a in self.angles))
        elif self.angles is not None:
            raise ValueError(f"{self.kind} frames carry no angles")


def encode(frame: CommandFrame) -> bytes:
    """Serialise a frame to its wire line."""
    if frame.kind == SET:
        for a in frame.angles:
            if not math.isfinite(a):
                raise ProtocolError(f"non-finite angle {a!r}")
        body = " ".join(f"{a:.6f}" for a in frame.angles)
        return f"SET {frame.sequence} {body}\n".encode("ascii")
    return f"{frame.kind} {frame.sequence}\n".encode("ascii")


def decode(data: bytes) -> CommandFrame:
    """Parse one wire line; raises ProtocolError with the byte offset of
    the offending token."""
    if not data.endswith(b"\n"):
        raise ProtocolError("missing newline terminator", offset=len(data))
    line = data[:-1]
    try:
        text = line.decode("ascii")
    except UnicodeDecodeError as exc:
        raise ProtocolError("non-ASCII byte", offset=exc.start) from None
    if text == "":
        raise ProtocolError("empty line", offset=0)
    if text != text.strip(" ") or "  " in text or any(c in text for c in "\t\r"):
        raise ProtocolError("malformed whitespace", offset=0)

    tokens = text.split(" ")
    offsets = []
    off = 0
    for tok in tokens:
        offsets.append(off)
        off += len(tok) + 1

    verb = tokens[0]
    if verb not in _KINDS:
        raise ProtocolError(f"unknown verb {verb!r}", offset=0)
    arity = 6 if verb == SET else 2
    if len(tokens) != arity:
        # point at the first surplus token, or the end of a short line
        bad = offsets[arity] if len(tokens) > arity else len(text)
        raise ProtocolError(
            f"{verb} expects {arity - 1} fields, got {len(tokens) - 1}",
            offset=bad)
    if not _SEQ_RE.match(tokens[1]):
        raise ProtocolError(f"bad sequence {tokens[1]!r}", offset=offsets[1])
    seq = int(tokens[1])
    if verb != SET:
        return CommandFrame(kind=verb, sequence=seq)
    angles = []
    for i, tok in enumerate(tokens[2:], start=2):
        if not _ANGLE_RE.match(tok):
            raise ProtocolError(f"bad angle {tok!r}", offset=offsets[i])
        angles.append(float(tok))
    return CommandFrame(kind=SET, sequence=seq, angles=tuple(angles))


def encode_ack(sequence: int) -> bytes:
    return f"ACK {sequence}\n".encode("ascii")


def encode_nack(sequence: int, reason: str) -> bytes:
    reason = reason.replace("\n", " ").strip() or "error"
    return f"NACK {sequence} {reason}\n".encode("ascii")


def encode_pos(sequence: int, angles) -> bytes:
    body = " ".join(f"{a:.6f}" for a in angles)
    return f"POS {sequence} {body}\n".encode("ascii")


# ---------------------------------------------------------------------------
# servo model

@dataclass(frozen=True)
class ServoState:
    """One rate-limited position servo."""

    position: float = 0.0
    target: float = 0.0
    max_speed: float = 6.1          # rad/s, hobby-servo class
    travel: tuple[float, float] = (-math.pi / 2, math.pi / 2)

    def __post_init__(self):
        lo, hi = self.travel
        if not (lo < hi):
            raise ValueError("travel limits must satisfy lo < hi")
        if not (self.max_speed > 0):
            raise ValueError("max_speed must be positive")
        object.__setattr__(self, "position",
                           min(max(float(self.position), lo), hi))
        object.__setattr__(self, "target", float(self.target))


def servo_step(state: ServoState, dt: float) -> ServoState:
    """Advance one servo by dt seconds.

    The position moves toward the target by at most max_speed*dt and is
    clamped to the travel range; a target beyond travel parks the servo at
    the limit.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    lo, hi = state.travel
    goal = min(max(state.target, lo), hi)
    step = state.max_speed * dt
    delta = goal - state.position
    if delta > step:
        delta = step
    elif delta < -step:
        delta = -step
    new_pos = state.position + delta
    # the addition may round outward by one ulp; keep the *stored*
    # displacement within the rate bound exactly, not approximately
    while abs(new_pos - state.position) > step:
        new_pos = math.nextafter(new_pos, state.position)
    return replace(state, position=new_pos)


class ServoBank:
    """Four servos stepped together; owned by the protocol service loop."""

    def __init__(self, count: int = 4, max_speed: float = 6.1,
                 travel: tuple[float, float] = (-math.pi / 2, math.pi / 2)):
        self._servos = [ServoState(max_speed=max_speed, travel=travel)
                        for _ in range(count)]

    def __len__(self) -> int:
        return len(self._servos)

    def set_targets(self, angles) -> None:
        if len(angles) != len(self._servos):
            raise ValueError("target count mismatch")
        self._servos = [replace(s, target=float(a))
                        for s, a in zip(self._servos, angles)]

    def step(self, dt: float) -> None:
        if dt <= 0:
            return
        self._servos = [servo_step(s, dt) for s in self._servos]

    def freeze(self) -> None:
        """Fail-safe: hold current positions (targets := positions)."""
        self._servos = [replace(s, target=s.position) for s in self._servos]

    @property
    def positions(self) -> tuple[float, ...]:
        return tuple(s.position for s in self._servos)

    @property
    def targets(self) -> tuple[float, ...]:
        return tuple(s.target for s in self._servos)
