"""SE(3) poses as unit quaternion + translation, with the handful of
operations the rest of the system needs (compose, invert, axis-angle
deltas, interpolation).

Conventions: quaternions are (w, x, y, z), translations are millimetres,
angles radians. Every constructor and operation renormalises the
quaternion so downstream code can rely on unit norm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

_EPS = 1e-12


def quat_normalize(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    n = math.sqrt(float(q @ q))
    if n < _EPS:
        raise ValueError("cannot normalize near-zero quaternion")
    return q / n


def quat_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ])


def quat_conj(q: np.ndarray) -> np.ndarray:
    return np.array([q[0], -q[1], -q[2], -q[3]])


def quat_rotate(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Rotate a 3-vector by a unit quaternion."""
    w, x, y, z = q
    u = np.array([x, y, z])
    uv = np.cross(u, v)
    return np.asarray(v, dtype=float) + 2.0 * (w * uv + np.cross(u, uv))


def quat_from_axis_angle(axis: np.ndarray, angle: float) -> np.ndarray:
    axis = np.asarray(axis, dtype=float)
    n = math.sqrt(float(axis @ axis))
    if n < _EPS:
        if abs(angle) < _EPS:
            return np.array([1.0, 0.0, 0.0, 0.0])
        raise ValueError("zero axis with nonzero angle")
    half = 0.5 * angle
    s = math.sin(half) / n
    return np.array([math.cos(half), axis[0] * s, axis[1] * s, axis[2] * s])


def quat_to_rotvec(q: np.ndarray) -> np.ndarray:
    """Axis-angle 3-vector (axis * angle, radians) of a unit quaternion."""
    w, x, y, z = quat_normalize(q)
    # keep the short way round
    if w < 0.0:
        w, x, y, z = -w, -x, -y, -z
    s = math.sqrt(max(0.0, 1.0 - w * w))
    angle = 2.0 * math.atan2(s, w)
    if s < 1e-12:
        # small angle: sin(a/2) ~ a/2, axis*angle ~ 2*(x,y,z)
        return 2.0 * np.array([x, y, z])
    return (angle / s) * np.array([x, y, z])


def quat_from_rotvec(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    angle = math.sqrt(float(v @ v))
    if angle < 1e-12:
        return quat_normalize(np.array([1.0, 0.5 * v[0], 0.5 * v[1], 0.5 * v[2]]))
    return quat_from_axis_angle(v, angle)


def quat_to_matrix(q: np.ndarray) -> np.ndarray:
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def quat_from_matrix(r: np.ndarray) -> np.ndarray:
    """Shepperd's method; r must be a proper rotation matrix."""
    r = np.asarray(r, dtype=float)
    tr = r[0, 0] + r[1, 1] + r[2, 2]
    if tr > 0.0:
        s = math.sqrt(tr + 1.0) * 2.0
        q = np.array([0.25 * s,
                      (r[2, 1] - r[1, 2]) / s,
                      (r[0, 2] - r[2, 0]) / s,
                      (r[1, 0] - r[0, 1]) / s])
    elif r[0, 0] >= r[1, 1] and r[0, 0] >= r[2, 2]:
        s = math.sqrt(1.0 + r[0, 0] - r[1, 1] - r[2, 2]) * 2.0
        q = np.array([(r[2, 1] - r[1, 2]) / s,
                      0.25 * s,
                      (r[0, 1] + r[1, 0]) / s,
                      (r[0, 2] + r[2, 0]) / s])
    elif r[1, 1] >= r[2, 2]:
        s = math.sqrt(1.0 + r[1, 1] - r[0, 0] - r[2, 2]) * 2.0
        q = np.array([(r[0, 2] - r[2, 0]) / s,
                      (r[0, 1] + r[1, 0]) / s,
                      0.25 * s,
                      (r[1, 2] + r[2, 1]) / s])
    else:
        s = math.sqrt(1.0 + r[2, 2] - r[0, 0] - r[1, 1]) * 2.0
        q = np.array([(r[1, 0] - r[0, 1]) / s,
                      (r[0, 2] + r[2, 0]) / s,
                      (r[1, 2] + r[2, 1]) / s,
                      0.25 * s])
    return quat_normalize(q)


def quat_slerp(a: np.ndarray, b: np.ndarray, u: float) -> np.ndarray:
    """Spherical interpolation from a (u=0) to b (u=1), shortest arc."""
    a = quat_normalize(a)
    b = quat_normalize(b)
    dot = float(a @ b)
    if dot < 0.0:
        b = -b
        dot = -dot
    if dot > 1.0 - 1e-10:
        return quat_normalize(a + u * (b - a))
    theta = math.acos(min(1.0, dot))
    s = math.sin(theta)
    return quat_normalize((math.sin((1 - u) * theta) / s) * a
                          + (math.sin(u * theta) / s) * b)


def rotation_angle(q: np.ndarray) -> float:
    """Magnitude in radians of the rotation a unit quaternion represents."""
    w = abs(float(quat_normalize(q)[0]))
    return 2.0 * math.acos(min(1.0, w))


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Pose:
    """Rigid-body transform: rotation (unit quaternion, w-first) then
    translation in mm. Maps points from the child frame to the parent."""

    q: np.ndarray = field(default_factory=lambda: _frozen([1.0, 0.0, 0.0, 0.0]))
    t: np.ndarray = field(default_factory=lambda: _frozen([0.0, 0.0, 0.0]))

    def __post_init__(self):
        object.__setattr__(self, "q", _frozen(quat_normalize(self.q)))
        t = np.asarray(self.t, dtype=float)
        if t.shape != (3,):
            raise ValueError(f"translation must be a 3-vector, got shape {t.shape}")
        if not np.all(np.isfinite(t)):
            raise ValueError("non-finite translation")
        object.__setattr__(self, "t", _frozen(t))

    @staticmethod
    def identity() -> "Pose":
        return Pose()

    @staticmethod
    def from_translation(t) -> "Pose":
        return Pose(t=np.asarray(t, dtype=float))

    @staticmethod
    def from_axis_angle(axis, angle: float, t=(0.0, 0.0, 0.0)) -> "Pose":
        return Pose(q=quat_from_axis_angle(np.asarray(axis, dtype=float), angle),
                    t=np.asarray(t, dtype=float))

    @staticmethod
    def from_rt(r: np.ndarray, t: np.ndarray) -> "Pose":
        return Pose(q=quat_from_matrix(r), t=np.asarray(t, dtype=float))

    def rotation_matrix(self) -> np.ndarray:
        return quat_to_matrix(self.q)

    def matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.rotation_matrix()
        m[:3, 3] = self.t
        return m

    def compose(self, other: "Pose") -> "Pose":
        """self then other (other expressed in self's child frame)."""
        return Pose(q=quat_mul(self.q, other.q),
                    t=self.t + quat_rotate(self.q, other.t))

    def __matmul__(self, other: "Pose") -> "Pose":
        return self.compose(other)

    def inverse(self) -> "Pose":
        qc = quat_conj(self.q)
        return Pose(q=qc, t=-quat_rotate(qc, self.t))

    def apply(self, p) -> np.ndarray:
        return quat_rotate(self.q, np.asarray(p, dtype=float)) + self.t

    def position_error(self, other: "Pose") -> float:
        """Euclidean distance between translations, mm."""
        d = self.t - other.t
        return math.sqrt(float(d @ d))

    def rotation_error(self, other: "Pose") -> float:
        """Angle in radians of the relative rotation self -> other."""
        return rotation_angle(quat_mul(other.q, quat_conj(self.q)))

    def is_close(self, other: "Pose", pos_tol: float = 1e-9,
                 rot_tol: float = 1e-9) -> bool:
        return (self.position_error(other) <= pos_tol
                and self.rotation_error(other) <= rot_tol)

    def as_dict(self) -> dict:
        return {"quat": [float(v) for v in self.q],
                "pos": [float(v) for v in self.t]}

    @staticmethod
    def from_dict(d: dict) -> "Pose":
        return Pose(q=np.asarray(d["quat"], dtype=float),
                    t=np.asarray(d["pos"], dtype=float))
