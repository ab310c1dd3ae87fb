"""Six-axis serial arm model (UR5e-class) via standard DH parameters.

The arm stands in for the macro manipulator's vendor controller: FK is
the product of the six standard DH link transforms and IK reuses the
shared damped-least-squares loop. The DH table is data (loaded from the
config document), so any 6-DOF arm can be substituted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import JointLimitError
from .geometry import Pose
from .ik import IkOptions, IkResult, iterate_dls
from .snake import _fd_jacobian

# Publicly documented UR5e parameters, millimetres / radians:
# (a, d, alpha, theta_offset) per link.
UR5E_DH = (
    (0.0, 162.5, math.pi / 2, 0.0),
    (-425.0, 0.0, 0.0, 0.0),
    (-392.2, 0.0, 0.0, 0.0),
    (0.0, 133.3, math.pi / 2, 0.0),
    (0.0, 99.7, -math.pi / 2, 0.0),
    (0.0, 99.6, 0.0, 0.0),
)


@dataclass(frozen=True)
class DHTable:
    """Six rows of standard DH link parameters (a mm, d mm, alpha rad,
    theta_offset rad)."""

    rows: tuple[tuple[float, float, float, float], ...]

    def __post_init__(self):
        rows = tuple(tuple(float(v) for v in row) for row in self.rows)
        if len(rows) != 6 or any(len(r) != 4 for r in rows):
            raise ValueError("DHTable needs exactly 6 rows of 4 parameters")
        if not all(math.isfinite(v) for r in rows for v in r):
            raise ValueError("non-finite DH parameter")
        object.__setattr__(self, "rows", rows)

    @property
    def reach(self) -> float:
        """Upper bound on tip distance from base: sum |a| + sum |d|."""
        return sum(abs(a) + abs(d) for a, d, _, _ in self.rows)

    @staticmethod
    def ur5e() -> "DHTable":
        return DHTable(rows=UR5E_DH)


@dataclass(frozen=True)
class ArmConfig:
    """Joint angles, rad."""

    joints: tuple[float, float, float, float, float, float] = (0.0,) * 6

    def __post_init__(self):
        vals = tuple(float(v) for v in self.joints)
        if len(vals) != 6:
            raise ValueError("ArmConfig needs 6 joint angles")
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("non-finite joint angle")
        object.__setattr__(self, "joints", vals)

    def as_array(self) -> np.ndarray:
        return np.array(self.joints)


DEFAULT_JOINT_LIMIT = 2.0 * math.pi


def check_arm_limits(q: np.ndarray, limits: np.ndarray) -> None:
    q = np.asarray(q, dtype=float)
    bad = np.abs(q) > limits + 1e-9
    if np.any(bad):
        j = int(np.argmax(bad))
        raise JointLimitError(
            f"arm joint {j}: |{q[j]:.6g}| exceeds limit {limits[j]:.6g}")


def arm_fk_batch(dh: DHTable, qs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Flange pose for a batch of joint vectors: (N,3,3) rotations, (N,3) mm."""
    qs = np.atleast_2d(np.asarray(qs, dtype=float))
    n = qs.shape[0]
    rot = np.broadcast_to(np.eye(3), (n, 3, 3)).copy()
    pos = np.zeros((n, 3))
    for j, (a, d, alpha, offset) in enumerate(dh.rows):
        th = qs[:, j] + offset
        ct, st = np.cos(th), np.sin(th)
        ca, sa = math.cos(alpha), math.sin(alpha)
        r = np.empty((n, 3, 3))
        r[:, 0, 0] = ct
        r[:, 0, 1] = -st * ca
        r[:, 0, 2] = st * sa
        r[:, 1, 0] = st
        r[:, 1, 1] = ct * ca
        r[:, 1, 2] = -ct * sa
        r[:, 2, 0] = 0.0
        r[:, 2, 1] = sa
        r[:, 2, 2] = ca
        t = np.empty((n, 3))
        t[:, 0] = a * ct
        t[:, 1] = a * st
        t[:, 2] = d
        pos += np.einsum("nij,nj->ni", rot, t)
        rot = rot @ r
    return rot, pos


def arm_fk(dh: DHTable, q: ArmConfig) -> Pose:
    """Flange pose in the arm base frame."""
    rot, pos = arm_fk_batch(dh, q.as_array()[None, :])
    return Pose.from_rt(rot[0], pos[0])


def arm_link_points(dh: DHTable, q: ArmConfig) -> np.ndarray:
    """Origins of the base and each link frame, (7, 3) mm; the linkage
    polyline used by visualisers."""
    pts = np.zeros((7, 3))
    rot = np.eye(3)
    pos = np.zeros(3)
    for j, (a, d, alpha, offset) in enumerate(dh.rows):
        th = q.joints[j] + offset
        ct, st = math.cos(th), math.sin(th)
        ca, sa = math.cos(alpha), math.sin(alpha)
        r = np.array([[ct, -st * ca, st * sa],
                      [st, ct * ca, -ct * sa],
                      [0.0, sa, ca]])
        t = np.array([a * ct, a * st, d])
        pos = pos + rot @ t
        rot = rot @ r
        pts[j + 1] = pos
    return pts


def arm_jacobian(dh: DHTable, q: ArmConfig,
                 limits: np.ndarray | None = None,
                 step: float = 1e-6) -> np.ndarray:
    """6x6 twist Jacobian by central differences (one-sided at limits)."""
    lim = np.full(6, DEFAULT_JOINT_LIMIT) if limits is None else limits
    return _fd_jacobian(lambda qs: arm_fk_batch(dh, qs),
                        q.as_array(), -lim, lim, step)


def arm_ik(dh: DHTable, target: Pose, seed: ArmConfig,
           opts: IkOptions | None = None,
           limits: np.ndarray | None = None) -> IkResult:
    """Damped-least-squares IK toward ``target``; same contract as the
    snake solver (best-so-far joints plus convergence flag)."""
    opts = opts or IkOptions()
    lim = np.full(6, DEFAULT_JOINT_LIMIT) if limits is None else np.asarray(limits, dtype=float)

    def eval_fn(q: np.ndarray):
        rot, pos = arm_fk_batch(dh, q[None, :])
        jac = _fd_jacobian(lambda qs: arm_fk_batch(dh, qs), q, -lim, lim, 1e-6)
        return rot[0], pos[0], jac

    return iterate_dls(eval_fn, target, seed.as_array(),
                       lambda q: np.clip(q, -lim, lim), opts)


def result_arm_config(res: IkResult) -> ArmConfig:
    return ArmConfig(joints=tuple(float(v) for v in res.joints))
