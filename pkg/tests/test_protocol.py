import math

import numpy as np
import pytest

from macromicro.errors import ProtocolError
from macromicro.protocol import (CommandFrame, ServoBank, ServoState, decode,
                                 encode, servo_step)
from macromicro.server import ServoClient, ServoServer, SimClock


GOLDEN_LINES = [
    (CommandFrame(kind="SET", sequence=7, angles=(0.1, -0.2, 0.0, 0.3)),
     b"SET 7 0.100000 -0.200000 0.000000 0.300000\n"),
    (CommandFrame(kind="PING", sequence=1), b"PING 1\n"),
    (CommandFrame(kind="GET", sequence=42), b"GET 42\n"),
    (CommandFrame(kind="SET", sequence=0,
                  angles=(-1.570796, 1.570796, 0.000001, -0.000001)),
     b"SET 0 -1.570796 1.570796 0.000001 -0.000001\n"),
]


@pytest.mark.parametrize("frame,wire", GOLDEN_LINES)
def test_golden_encode(frame, wire):
    assert encode(frame) == wire


@pytest.mark.parametrize("frame,wire", GOLDEN_LINES)
def test_golden_decode(frame, wire):
    assert decode(wire) == frame


def test_round_trip_random_frames(rng):
    kinds = ["SET", "GET", "PING"]
    for _ in range(2000):
        kind = kinds[rng.integers(0, 3)]
        seq = int(rng.integers(0, 2**32))
        if kind == "SET":
            # wire resolution is 1e-6 rad: draw from that grid
            angles = tuple(float(a) / 1e6 for a in
                           rng.integers(-1_570_796, 1_570_797, size=4))
            frame = CommandFrame(kind=kind, sequence=seq, angles=angles)
        else:
            frame = CommandFrame(kind=kind, sequence=seq)
        assert decode(encode(frame)) == frame


@pytest.mark.parametrize("wire,offset", [
    (b"SET 7 0.1 x 0 0\n", 6),          # first bad angle token
    (b"\n", 0),
    (b"BLAH 1\n", 0),
    (b"SET 7 0.100000 -0.200000 0.000000\n", 33),  # short line: offset at end
    (b"GET 7 9\n", 6),                  # surplus token
    (b"SET -1 0.100000 0.100000 0.100000 0.100000\n", 4),
    (b"SET 7  0.100000 0.100000 0.100000 0.100000\n", 0),  # double space
    (b"GET 7", 5),                      # missing newline
    (b"PING x\n", 5),
])
def test_decode_errors_carry_offsets(wire, offset):
    with pytest.raises(ProtocolError) as err:
        decode(wire)
    assert err.value.offset == offset


def test_encode_rejects_non_finite():
    frame = CommandFrame(kind="SET", sequence=1,
                         angles=(0.0, 0.0, 0.0, 0.0))
    bad = CommandFrame(kind="SET", sequence=1,
                       angles=(0.0, 0.0, 0.0, 0.0))
    object.__setattr__(bad, "angles", (math.nan, 0.0, 0.0, 0.0))
    encode(frame)
    with pytest.raises(ProtocolError):
        encode(bad)


def test_frame_validation():
    with pytest.raises(ValueError):
        CommandFrame(kind="SET", sequence=1)              # SET needs angles
    with pytest.raises(ValueError):
        CommandFrame(kind="GET", sequence=1, angles=(0.0,) * 4)
    with pytest.raises(ValueError):
        CommandFrame(kind="NOPE", sequence=1)
    with pytest.raises(ValueError):
        CommandFrame(kind="PING", sequence=-1)


# ---------------------------------------------------------------------------
# servo model

def test_servo_rate_limit_binds():
    s = ServoState(position=0.0, target=1.0, max_speed=6.1)
    s = servo_step(s, 0.01)
    assert s.position == pytest.approx(0.061, abs=1e-15)


def test_servo_reaches_target():
    s = ServoState(position=0.999, target=1.0, max_speed=6.1)
    s = servo_step(s, 0.01)
    assert s.position == 1.0


def test_servo_parks_at_travel_limit():
    s = ServoState(position=1.5, target=9.0, max_speed=100.0)
    s = servo_step(s, 1.0)
    assert s.position == pytest.approx(math.pi / 2)
    s = servo_step(s, 1.0)
    assert s.position == pytest.approx(math.pi / 2)


def test_servo_displacement_never_exceeds_speed_times_dt(rng):
    s = ServoState()
    dt = 0.013
    for _ in range(500):
        if rng.uniform() < 0.3:
            s = ServoState(position=s.position,
                           target=float(rng.uniform(-3, 3)))
        prev = s.position
        s = servo_step(s, dt)
        assert abs(s.position - prev) <= s.max_speed * dt  # exact bound
        lo, hi = s.travel
        assert lo <= s.position <= hi


# ---------------------------------------------------------------------------
# TCP service

def test_serve_set_then_get_converges():
    clock = SimClock()
    bank = ServoBank()
    with ServoServer(bank, clock) as server:
        with ServoClient(server.address) as client:
            assert client.set_angles((0.5, -0.25, 0.1, 0.0)).startswith("ACK")
            clock.advance(5.0)  # plenty of time at 6.1 rad/s
            pos = client.get_positions()
            assert np.allclose(pos, (0.5, -0.25, 0.1, 0.0), atol=1e-9)


def test_serve_rate_limited_intermediate_position():
    clock = SimClock()
    bank = ServoBank()
    with ServoServer(bank, clock) as server:
        with ServoClient(server.address) as client:
            client.set_angles((1.0, 0.0, 0.0, 0.0))
            clock.advance(0.01)
            pos = client.get_positions()
            assert pos[0] == pytest.approx(0.061, abs=1e-9)


def test_serve_nack_keeps_connection_alive():
    clock = SimClock()
    with ServoServer(ServoBank(), clock) as server:
        with ServoClient(server.address) as client:
            client._sock.sendall(b"SET 1 nope\n")
            reply = client._roundtrip(b"")
            assert reply.startswith("NACK")
            # the bad line burned no sequence number; normal traffic resumes
            assert client.set_angles((0.0, 0.0, 0.0, 0.0)) == "ACK 1"
            assert client.ping() == "ACK 2"


def test_serve_rejects_stale_sequence():
    clock = SimClock()
    bank = ServoBank()
    with ServoServer(bank, clock) as server:
        with ServoClient(server.address) as client:
            client.set_angles((0.25, 0.0, 0.0, 0.0))   # seq 1
            # replayed sequence number: refused, targets untouched
            client._sock.sendall(b"SET 1 0.900000 0.900000 0.900000 0.900000\n")
            assert client._roundtrip(b"").startswith("NACK")
            assert bank.targets == (0.25, 0.0, 0.0, 0.0)
            assert client.ping().startswith("ACK")     # seq 3 still fine
            # final targets equal the highest accepted SET
            client.set_angles((0.5, 0.1, -0.1, 0.0))   # seq 4
            assert bank.targets == (0.5, 0.1, -0.1, 0.0)


def test_disconnect_freezes_mid_motion():
    clock = SimClock()
    bank = ServoBank()
    with ServoServer(bank, clock) as server:
        client = ServoClient(server.address)
        client.set_angles((1.0, 0.0, 0.0, 0.0))
        clock.advance(0.05)
        pos = client.get_positions()  # steps to t=0.05: 0.305
        client.close()
        deadline = 50
        while bank.targets != bank.positions and deadline:
            deadline -= 1
            import time
            time.sleep(0.05)
        clock.advance(10.0)
        assert bank.positions[0] == pytest.approx(pos[0], abs=1e-9)
        assert bank.targets == bank.positions  # frozen
