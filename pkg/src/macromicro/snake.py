"""Rolling-joint continuum manipulator model.

The manipulator is a stack of two 2-DOF sub-modules (proximal, distal) on
a straight shaft. Each sub-module is a chain of rolling interfaces that
bend in one of two orthogonal directions (pan or tilt); a module-level
bending angle is split evenly across its same-axis interfaces. Antagonist
tendon pairs drive each bending axis, wound onto a pulley per pair.

Units: millimetres and radians throughout. Frames follow the convention
that +z points along the straight manipulator, pan bends the tip toward
+x and tilt toward +y.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .errors import JointLimitError, SaturationError
from .geometry import Pose

PAN = "pan"
TILT = "tilt"

# module angle vector layout: (prox pan, prox tilt, dist pan, dist tilt)
AXIS_ORDER = ((0, PAN), (0, TILT), (1, PAN), (1, TILT))
PAIR_NAMES = ("prox-pan", "prox-tilt", "dist-pan", "dist-tilt")

_LIMIT_SLACK = 1e-9


@dataclass(frozen=True)
class ModuleParams:
    """Geometry of one 2-DOF sub-module.

    joint_count: number of rolling interfaces in the module.
    width: joint diameter, mm (chord of the rolling arc).
    half_angle: half-angle of curvature of each rolling surface, rad.
    separation: gap between the facing rolling surfaces of an interface, mm.
    radius: rolling-surface radius, mm; derived as width / (2 sin half_angle)
        unless overridden.
    axis_pattern: bending axis of each interface, proximal to distal.
    """

    joint_count: int
    width: float
    half_angle: float
    separation: float
    radius: float | None = None
    axis_pattern: tuple[str, ...] = ()

    def __post_init__(self):
        if self.joint_count < 1:
            raise ValueError("joint_count must be >= 1")
        if not (self.width > 0):
            raise ValueError("width must be positive")
        if not (0 < self.half_angle < math.pi / 2):
            raise ValueError("half_angle must be in (0, pi/2)")
        if self.separation < 0:
            raise ValueError("separation must be >= 0")
        pattern = tuple(self.axis_pattern) or _default_pattern(self.joint_count)
        if len(pattern) != self.joint_count:
            raise ValueError("axis_pattern length must equal joint_count")
        if any(a not in (PAN, TILT) for a in pattern):
            raise ValueError(f"axis_pattern entries must be '{PAN}' or '{TILT}'")
        if PAN not in pattern:
            raise ValueError("axis_pattern needs at least one pan interface")
        if self.joint_count >= 2 and TILT not in pattern:
            raise ValueError("axis_pattern needs a tilt interface for 2-DOF modules")
        object.__setattr__(self, "axis_pattern", pattern)
        if self.radius is None:
            object.__setattr__(
                self, "radius", self.width / (2.0 * math.sin(self.half_angle)))
        elif not (self.radius > 0):
            raise ValueError("radius must be positive")

    def axis_count(self, axis: str) -> int:
        return sum(1 for a in self.axis_pattern if a == axis)

    @property
    def interface_limit(self) -> float:
        """Per-interface bending bound: rolling contact holds for |angle| <= 2*half_angle."""
        return 2.0 * self.half_angle

    def module_limit(self, axis: str) -> float:
        """Module-level bound for one axis (per-interface bound times interface count)."""
        return self.interface_limit * self.axis_count(axis)


def _default_pattern(count: int) -> tuple[str, ...]:
    # alternate starting with pan: [pan, tilt, pan, ...]
    return tuple(PAN if i % 2 == 0 else TILT for i in range(count))


SplitStrategy = Callable[[ModuleParams, str], tuple[float, ...]]


def uniform_split(module: ModuleParams, axis: str) -> tuple[float, ...]:
    """Default split: the module angle divides evenly across its same-axis
    interfaces."""
    count = module.axis_count(axis)
    return tuple(1.0 / count for _ in range(count))


@dataclass(frozen=True)
class SnakeDescriptor:
    """Full manipulator geometry: two sub-modules, shaft and drive pulleys.

    ``split_strategy`` maps (module, axis) to the fraction of the module
    angle carried by each same-axis interface in chain order (weights sum
    to 1); None means the uniform default.
    """

    proximal: ModuleParams
    distal: ModuleParams
    inter_module_roll: float = math.pi / 4
    shaft_length: float = 250.0
    segment_height: float = 2.0
    pulley_radius: float = 10.0
    pulley_travel: float = math.pi / 2
    split_strategy: SplitStrategy | None = None

    def __post_init__(self):
        if not (self.pulley_radius > 0):
            raise ValueError("pulley_radius must be positive")
        if not (self.pulley_travel > 0):
            raise ValueError("pulley_travel must be positive")
        if self.shaft_length < 0 or self.segment_height < 0:
            raise ValueError("lengths must be non-negative")

    @property
    def modules(self) -> tuple[ModuleParams, ModuleParams]:
        return (self.proximal, self.distal)

    def axis_weights(self, module_index: int, axis: str) -> tuple[float, ...]:
        """Per-interface share of the module angle for one bending axis."""
        module = self.modules[module_index]
        strategy = self.split_strategy or uniform_split
        weights = tuple(float(w) for w in strategy(module, axis))
        count = module.axis_count(axis)
        if (len(weights) != count or any(w < 0 for w in weights)
                or abs(sum(weights) - 1.0) > 1e-9):
            raise ValueError(
                f"split weights for {axis} must be {count} non-negative "
                "values summing to 1")
        return weights

    @property
    def solid_segment_count(self) -> int:
        # one solid part ahead of every interface plus the end-effector base
        return self.proximal.joint_count + self.distal.joint_count + 1

    @property
    def straight_length(self) -> float:
        """Length of the articulated stack (excluding shaft) at zero bending."""
        gaps = sum(m.joint_count * m.separation for m in self.modules)
        return gaps + self.solid_segment_count * self.segment_height

    def module_limits(self) -> np.ndarray:
        """Max |module angle| per entry of the 4-vector layout.

        The most-loaded interface (largest split weight) saturates first,
        so the module bound is interface_limit / max weight."""
        out = []
        for m, axis in AXIS_ORDER:
            biggest = max(self.axis_weights(m, axis))
            out.append(self.modules[m].interface_limit / biggest)
        return np.array(out)

    @staticmethod
    def default() -> "SnakeDescriptor":
        """Desk-scale defaults: 3+3 interfaces, 20 mm articulated stack."""
        return SnakeDescriptor(
            proximal=ModuleParams(joint_count=3, width=4.0, half_angle=0.2,
                                  separation=1.0),
            distal=ModuleParams(joint_count=3, width=4.0, half_angle=0.88,
                                separation=1.0),
        )


@dataclass(frozen=True)
class SnakeConfig:
    """Module bending angles (prox pan, prox tilt, dist pan, dist tilt), rad."""

    angles: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)

    def __post_init__(self):
        vals = tuple(float(v) for v in self.angles)
        if len(vals) != 4:
            raise ValueError("SnakeConfig needs exactly 4 module angles")
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("non-finite module angle")
        object.__setattr__(self, "angles", vals)

    def as_array(self) -> np.ndarray:
        return np.array(self.angles)


@dataclass(frozen=True)
class TendonState:
    """Tendon length deltas from the straight configuration, mm.

    Layout: (left, right) per antagonist pair, pairs ordered
    prox-pan, prox-tilt, dist-pan, dist-tilt -> 8 entries.
    """

    lengths: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(v) for v in self.lengths)
        if len(vals) != 8:
            raise ValueError("TendonState needs 8 tendon deltas")
        object.__setattr__(self, "lengths", vals)

    def pair(self, k: int) -> tuple[float, float]:
        """(left, right) deltas of antagonist pair k."""
        return self.lengths[2 * k], self.lengths[2 * k + 1]


@dataclass(frozen=True)
class ActuatorCommand:
    """Pulley rotation per antagonist pair, rad; same pair order as TendonState."""

    pulley_angles: tuple[float, float, float, float]

    def __post_init__(self):
        vals = tuple(float(v) for v in self.pulley_angles)
        if len(vals) != 4:
            raise ValueError("ActuatorCommand needs 4 pulley angles")
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("non-finite pulley angle")
        object.__setattr__(self, "pulley_angles", vals)


def tendon_delta(half_angle: float, radius: float, angle: float,
                 interface: str | None = None) -> float:
    """Length change of the tendon on the bending side of one interface.

    For interface angle ``angle`` the tendon in the bending plane changes by
    2 * radius * (cos(half_angle) - cos(half_angle - angle/2)); the
    antagonist tendon is the same expression evaluated at -angle.
    Negative means the tendon shortens.
    """
    limit = 2.0 * half_angle
    if abs(angle) > limit + _LIMIT_SLACK:
        where = f" at {interface}" if interface else ""
        raise JointLimitError(
            f"interface angle {angle:.6g} exceeds limit {limit:.6g}{where}")
    return 2.0 * radius * (math.cos(half_angle)
                           - math.cos(half_angle - 0.5 * angle))


def _rolling_translation(radius: float, separation: float, angle: float
                         ) -> tuple[float, float]:
    """(in-plane, axial) translation of one rolling interface.

    Two radius-r arc surfaces separated by ``separation`` roll without
    slipping; their centres stay 2r+d apart while the contact normal
    bisects the joint angle.
    """
    two_rd = 2.0 * radius + separation
    half = 0.5 * angle
    p_along = two_rd * math.sin(half) - radius * math.sin(angle)
    p_axial = -radius + two_rd * math.cos(half) - radius * math.cos(angle)
    return p_along, p_axial


def interface_transform(params: ModuleParams, axis: str, angle: float,
                        interface: str | None = None) -> Pose:
    """Rigid transform across one rolling interface.

    Rotation is ``angle`` about the interface's bending axis; translation
    follows the rolling-contact closed form. At angle 0 this reduces to a
    pure translation of ``separation`` along +z. Pan bends toward +x
    (rotation about +y), tilt toward +y (rotation about -x).
    """
    limit = params.interface_limit
    if abs(angle) > limit + _LIMIT_SLACK:
        where = f" at {interface}" if interface else ""
        raise JointLimitError(
            f"interface angle {angle:.6g} exceeds limit {limit:.6g}{where}")
    p_along, p_axial = _rolling_translation(params.radius, params.separation,
                                            angle)
    if axis == PAN:
        rot_axis = (0.0, 1.0, 0.0)
        t = (p_along, 0.0, p_axial)
    elif axis == TILT:
        rot_axis = (-1.0, 0.0, 0.0)
        t = (0.0, p_along, p_axial)
    else:
        raise ValueError(f"unknown axis {axis!r}")
    return Pose.from_axis_angle(rot_axis, angle, t)


def interface_angles(desc: SnakeDescriptor, config: SnakeConfig,
                     check: bool = True) -> list[tuple[int, str, float, int]]:
    """Flatten a module-angle config into per-interface angles.

    Returns (module index, axis, interface angle, interface index) in chain
    order. Raises JointLimitError when an interface exceeds its bound.
    """
    theta = config.angles
    out = []
    idx = 0
    for m, module in enumerate(desc.modules):
        shares = {}
        for axis in (PAN, TILT):
            if module.axis_count(axis):
                key = AXIS_ORDER.index((m, axis))
                shares[axis] = [theta[key] * w
                                for w in desc.axis_weights(m, axis)]
        used = {PAN: 0, TILT: 0}
        for axis in module.axis_pattern:
            phi = shares[axis][used[axis]]
            used[axis] += 1
            if check and abs(phi) > module.interface_limit + _LIMIT_SLACK:
                raise JointLimitError(
                    f"{'proximal' if m == 0 else 'distal'} interface {idx}"
                    f" ({axis}): |{phi:.6g}| exceeds limit "
                    f"{module.interface_limit:.6g}")
            out.append((m, axis, phi, idx))
            idx += 1
    return out


def check_limits(desc: SnakeDescriptor, config: SnakeConfig) -> None:
    interface_angles(desc, config, check=True)


def clamp_config(desc: SnakeDescriptor, theta: np.ndarray) -> np.ndarray:
    """Clamp a module-angle 4-vector into the joint-limit envelope."""
    lim = desc.module_limits()
    return np.clip(np.asarray(theta, dtype=float), -lim, lim)


# ---------------------------------------------------------------------------
# forward kinematics

def _chain_ops(desc: SnakeDescriptor, check: bool, thetas: np.ndarray
               ) -> Iterable[tuple[str, object]]:
    """Yield ('trans', z) / ('roll', angle) / ('iface', (module, axis, phis))
    steps in chain order; phis is the (N,) per-interface angle batch."""
    yield ("trans", desc.shaft_length)
    for m, module in enumerate(desc.modules):
        if m == 1:
            yield ("roll", desc.inter_module_roll)
        shares = {}
        for axis in (PAN, TILT):
            if module.axis_count(axis):
                k = AXIS_ORDER.index((m, axis))
                shares[axis] = [thetas[:, k] * w
                                for w in desc.axis_weights(m, axis)]
        used = {PAN: 0, TILT: 0}
        for i, axis in enumerate(module.axis_pattern):
            phis = shares[axis][used[axis]]
            used[axis] += 1
            if check:
                bad = np.abs(phis) > module.interface_limit + _LIMIT_SLACK
                if np.any(bad):
                    raise JointLimitError(
                        f"{'proximal' if m == 0 else 'distal'} interface "
                        f"{i} ({axis}) exceeds per-interface limit "
                        f"{module.interface_limit:.6g}")
            yield ("trans", desc.segment_height)
            yield ("iface", (module, axis, phis))
    yield ("trans", desc.segment_height)


def _iface_rt(module: ModuleParams, axis: str, phis: np.ndarray
              ) -> tuple[np.ndarray, np.ndarray]:
    """Batched rotation matrices and translations for one interface."""
    n = phis.shape[0]
    two_rd = 2.0 * module.radius + module.separation
    half = 0.5 * phis
    p_along = two_rd * np.sin(half) - module.radius * np.sin(phis)
    p_axial = (-module.radius + two_rd * np.cos(half)
               - module.radius * np.cos(phis))
    c, s = np.cos(phis), np.sin(phis)
    r = np.zeros((n, 3, 3))
    t = np.zeros((n, 3))
    if axis == PAN:
        # rotation about +y
        r[:, 0, 0] = c
        r[:, 0, 2] = s
        r[:, 1, 1] = 1.0
        r[:, 2, 0] = -s
        r[:, 2, 2] = c
        t[:, 0] = p_along
    else:
        # rotation about -x
        r[:, 0, 0] = 1.0
        r[:, 1, 1] = c
        r[:, 1, 2] = s
        r[:, 2, 1] = -s
        r[:, 2, 2] = c
        t[:, 1] = p_along
    t[:, 2] = p_axial
    return r, t


def snake_fk_batch(desc: SnakeDescriptor, thetas: np.ndarray,
                   check: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Tip pose for a batch of module-angle vectors.

    thetas: (N, 4) array. Returns rotation matrices (N, 3, 3) and tip
    positions (N, 3) relative to the manipulator base.
    """
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    n = thetas.shape[0]
    rot = np.broadcast_to(np.eye(3), (n, 3, 3)).copy()
    pos = np.zeros((n, 3))
    for kind, payload in _chain_ops(desc, check, thetas):
        if kind == "trans":
            pos += payload * rot[:, :, 2]
        elif kind == "roll":
            c, s = math.cos(payload), math.sin(payload)
            rz = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
            rot = rot @ rz
        else:
            module, axis, phis = payload
            r_loc, t_loc = _iface_rt(module, axis, phis)
            pos += np.einsum("nij,nj->ni", rot, t_loc)
            rot = rot @ r_loc
    return rot, pos


def snake_fk(desc: SnakeDescriptor, config: SnakeConfig) -> Pose:
    """Tip pose relative to the manipulator base (shaft root)."""
    rot, pos = snake_fk_batch(desc, config.as_array()[None, :])
    return Pose.from_rt(rot[0], pos[0])


def snake_backbone(desc: SnakeDescriptor, config: SnakeConfig) -> np.ndarray:
    """Polyline along the chain (base, shaft end, each interface, tip), mm."""
    thetas = config.as_array()[None, :]
    rot = np.eye(3)
    pos = np.zeros(3)
    points = [pos.copy()]
    for kind, payload in _chain_ops(desc, True, thetas):
        if kind == "trans":
            pos = pos + payload * rot[:, 2]
            points.append(pos.copy())
        elif kind == "roll":
            c, s = math.cos(payload), math.sin(payload)
            rot = rot @ np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
        else:
            module, axis, phis = payload
            r_loc, t_loc = _iface_rt(module, axis, phis)
            pos = pos + rot @ t_loc[0]
            rot = rot @ r_loc[0]
            points.append(pos.copy())
    return np.asarray(points)


def _rotvec_from_matrix(r: np.ndarray) -> np.ndarray:
    """Axis-angle vector of a rotation matrix (radians)."""
    tr = np.clip((np.trace(r) - 1.0) * 0.5, -1.0, 1.0)
    theta = math.acos(tr)
    w = 0.5 * np.array([r[2, 1] - r[1, 2], r[0, 2] - r[2, 0],
                        r[1, 0] - r[0, 1]])
    if theta < 1e-9:
        return w  # sin(theta) ~ theta: w is already axis*angle to first order
    return w * (theta / math.sin(theta))


def _fd_jacobian(fk_batch, theta: np.ndarray, limits_lo: np.ndarray,
                 limits_hi: np.ndarray, step: float) -> np.ndarray:
    """Central-difference twist Jacobian of a batched FK callable.

    Near a joint limit the probe that would cross the limit is replaced by
    the centre point (one-sided difference).
    """
    theta = np.asarray(theta, dtype=float)
    k = theta.shape[0]
    probes = [theta]  # index 0 is the centre point
    spans = np.empty(k)
    pairs = []
    for j in range(k):
        up = theta[j] + step <= limits_hi[j]
        dn = theta[j] - step >= limits_lo[j]
        spans[j] = (step if up else 0.0) + (step if dn else 0.0)
        if spans[j] == 0.0:
            raise JointLimitError(
                f"joint {j} interval too narrow for step {step}")
        i_hi = i_lo = 0
        if up:
            hi = theta.copy()
            hi[j] += step
            i_hi = len(probes)
            probes.append(hi)
        if dn:
            lo = theta.copy()
            lo[j] -= step
            i_lo = len(probes)
            probes.append(lo)
        pairs.append((i_hi, i_lo))
    rot, pos = fk_batch(np.stack(probes))
    jac = np.zeros((6, k))
    for j, (i_hi, i_lo) in enumerate(pairs):
        dp = pos[i_hi] - pos[i_lo]
        dr = _rotvec_from_matrix(rot[i_hi] @ rot[i_lo].T)
        jac[:3, j] = dp / spans[j]
        jac[3:, j] = dr / spans[j]
    return jac


def snake_jacobian(desc: SnakeDescriptor, config: SnakeConfig,
                   step: float = 1e-6) -> np.ndarray:
    """6x4 task-twist Jacobian of the tip pose wrt module angles.

    Rows 0-2 are translation (mm/rad), rows 3-5 rotation (rad/rad), by
    central finite differences (one-sided at the joint-limit boundary).
    """
    check_limits(desc, config)
    lim = desc.module_limits()
    return _fd_jacobian(
        lambda th: snake_fk_batch(desc, th, check=False),
        config.as_array(), -lim, lim, step)


# ---------------------------------------------------------------------------
# tendon and actuator mappings

def joints_to_tendons(desc: SnakeDescriptor, config: SnakeConfig) -> TendonState:
    """Tendon deltas for a configuration.

    A tendon accumulates the per-interface length change at every interface
    it crosses whose bending axis matches its own; left and right tendons of
    a pair see opposite interface angles. Distal tendons are routed through
    the whole proximal module, so proximal bending couples into them;
    cross-axis interfaces contribute nothing to first order.
    """
    per_iface = interface_angles(desc, config, check=True)
    deltas = []
    for m_pair, axis_pair in AXIS_ORDER:
        left = right = 0.0
        for m, axis, phi, idx in per_iface:
            crosses = (m == m_pair) or (m_pair == 1 and m == 0)
            if not crosses or axis != axis_pair:
                continue
            module = desc.modules[m]
            name = f"interface {idx}"
            left += tendon_delta(module.half_angle, module.radius, phi, name)
            right += tendon_delta(module.half_angle, module.radius, -phi, name)
        deltas.extend((left, right))
    return TendonState(lengths=tuple(deltas))


def tendons_to_actuators(desc: SnakeDescriptor,
                         tendons: TendonState) -> ActuatorCommand:
    """Pulley angles realising a tendon state.

    Each pulley winds its pair's left tendon while paying out the right,
    so angle = (left - right) / (2 * pulley_radius).
    """
    angles = []
    for k, name in enumerate(PAIR_NAMES):
        left, right = tendons.pair(k)
        angle = (left - right) / (2.0 * desc.pulley_radius)
        if abs(angle) > desc.pulley_travel + _LIMIT_SLACK:
            raise SaturationError(
                f"pulley {name}: angle {angle:.6g} exceeds travel "
                f"{desc.pulley_travel:.6g}")
        angles.append(angle)
    return ActuatorCommand(pulley_angles=tuple(angles))
