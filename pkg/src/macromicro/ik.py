"""Damped-least-squares inverse kinematics.

One iterative solver serves both manipulators: the continuum snake
(4 module angles) and the serial arm (6 joints). The task error is a
6-vector twist (translation in mm, rotation as an axis-angle vector in
rad) and each step is the damped pseudo-inverse update, clamped per
iteration and to the joint limits.

Heavily curled targets admit a mirror-image local minimum where the
distal module saturates at the wrong-sign limit, so the loop detects
stalls (insufficient score improvement over a sliding window) and
restarts from a deterministic set of curl seeds, all within the single
iteration budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import SingularityError
from .geometry import Pose, quat_to_matrix
from .snake import (SnakeConfig, SnakeDescriptor, _fd_jacobian,
                    _rotvec_from_matrix, clamp_config, snake_fk_batch)


def dls_step(jac: np.ndarray, dx: np.ndarray, damping: float) -> np.ndarray:
    """One damped-least-squares joint update.

    With damping > 0 this is J^T (J J^T + damping^2 I)^-1 dx. With zero
    damping the update is the exact least-squares (pseudo-inverse) step,
    computed through the equivalent normal-equations form
    (J^T J)^-1 J^T dx, and a column-rank-deficient J raises
    SingularityError because the undamped step is then unbounded.
    """
    jac = np.asarray(jac, dtype=float)
    dx = np.asarray(dx, dtype=float)
    if damping < 0:
        raise ValueError("damping must be >= 0")
    if damping == 0.0:
        try:
            dq = np.linalg.solve(jac.T @ jac, jac.T @ dx)
        except np.linalg.LinAlgError as exc:
            raise SingularityError(
                "rank-deficient Jacobian with zero damping") from exc
        if not np.all(np.isfinite(dq)):
            raise SingularityError("rank-deficient Jacobian with zero damping")
        return dq
    a = jac @ jac.T + (damping * damping) * np.eye(jac.shape[0])
    return jac.T @ np.linalg.solve(a, dx)


@dataclass(frozen=True)
class IkOptions:
    """Solver knobs; defaults are stable at a 100 Hz teleop loop."""

    damping: float = 0.1
    max_step: float = 0.05        # per-iteration |joint change| bound, rad
    pos_tol: float = 0.01         # mm
    rot_tol_deg: float = 0.1
    max_iters: int = 200
    stall_window: int = 12        # iterations without real progress => restart
    stall_ratio: float = 0.9      # "real progress" = score shrinks below this
    # least-squares weight of the rotation error rows, mm per rad; < 1
    # prioritises position when the target pose is not exactly reachable
    # (an underactuated tip tracking a 6-DOF stream). Convergence is still
    # judged against the unweighted tolerances.
    rot_weight: float = 1.0


@dataclass(frozen=True)
class IkResult:
    joints: np.ndarray
    converged: bool
    iterations: int
    pos_err: float       # mm
    rot_err_deg: float


EvalFn = Callable[[np.ndarray], tuple[np.ndarray, np.ndarray, np.ndarray]]


def iterate_dls(eval_fn: EvalFn, target: Pose, seed: np.ndarray,
                clamp: Callable[[np.ndarray], np.ndarray], opts: IkOptions,
                restart_seeds: Sequence[np.ndarray] = ()) -> IkResult:
    """Generic DLS loop over a (rotation, position, Jacobian) evaluator.

    Runs from ``seed`` first; whenever an attempt stalls it moves to the
    next restart seed (then once more from the best joints seen). All
    attempts share one ``max_iters`` budget of DLS steps. Returns the
    best-scoring joints either way, flagged with convergence.
    """
    r_t = quat_to_matrix(target.q)
    p_t = np.asarray(target.t, dtype=float)
    rot_tol = math.radians(opts.rot_tol_deg)

    queue = [clamp(np.asarray(seed, dtype=float).copy())]
    queue.extend(clamp(np.asarray(s, dtype=float).copy())
                 for s in restart_seeds)
    steps = 0
    best_score = math.inf
    best_q = queue[0].copy()
    best_err = (math.inf, math.inf)
    resumed = False
    while queue:
        q = queue.pop(0)
        history: list[float] = []
        while True:
            rot, pos, jac = eval_fn(q)
            dp = p_t - pos
            dr = _rotvec_from_matrix(r_t @ rot.T)
            pos_err = float(np.linalg.norm(dp))
            rot_err = float(np.linalg.norm(dr))
            # progress is measured by the same weighted objective the
            # steps minimise, so best-so-far matches the LS stationary
            # point even when the target is not exactly reachable
            score = pos_err ** 2 + (opts.rot_weight * rot_err) ** 2
            if score < best_score:
                best_score = score
                best_q = q.copy()
                best_err = (pos_err, rot_err)
            if pos_err < opts.pos_tol and rot_err < rot_tol:
                return IkResult(joints=q, converged=True, iterations=steps,
                                pos_err=pos_err,
                                rot_err_deg=math.degrees(rot_err))
            if steps == opts.max_iters:
                return IkResult(joints=best_q, converged=False,
                                iterations=steps, pos_err=best_err[0],
                                rot_err_deg=math.degrees(best_err[1]))
            history.append(score)
            if (len(history) > opts.stall_window
                    and history[-1] > opts.stall_ratio ** 2
                    * history[-1 - opts.stall_window]):
                break  # local minimum: try the next seed
            if opts.rot_weight != 1.0:
                jac = jac.copy()
                jac[3:, :] *= opts.rot_weight
                dr = opts.rot_weight * dr
            dq = dls_step(jac, np.concatenate([dp, dr]), opts.damping)
            biggest = float(np.max(np.abs(dq)))
            if biggest > opts.max_step:
                dq *= opts.max_step / biggest
            q = clamp(q + dq)
            steps += 1
        if not queue and not resumed:
            resumed = True
            queue.append(best_q.copy())
    return IkResult(joints=best_q, converged=False, iterations=steps,
                    pos_err=best_err[0],
                    rot_err_deg=math.degrees(best_err[1]))


def _curl_seeds(desc: SnakeDescriptor, target: Pose,
                opts: IkOptions) -> list[np.ndarray]:
    """Distal curl branch seeds, best-scoring first."""
    lim = desc.module_limits()
    cands = np.array([[0.0, 0.0, s * 0.5 * lim[2], t * 0.5 * lim[3]]
                      for s in (-1, 0, 1) for t in (-1, 0, 1)
                      if (s, t) != (0, 0)])
    rots, poss = snake_fk_batch(desc, cands, check=False)
    r_t = quat_to_matrix(target.q)
    p_t = np.asarray(target.t, dtype=float)
    scores = [float(np.linalg.norm(p_t - poss[i])) ** 2
              + (opts.rot_weight
                 * float(np.linalg.norm(_rotvec_from_matrix(r_t @ rots[i].T)))
                 ) ** 2
              for i in range(cands.shape[0])]
    return [cands[k] for k in np.argsort(scores)]


def _snake_eval(desc: SnakeDescriptor, step: float = 1e-6) -> EvalFn:
    lim = desc.module_limits()

    def eval_fn(q: np.ndarray):
        rot, pos = snake_fk_batch(desc, q[None, :], check=False)
        jac = _fd_jacobian(lambda th: snake_fk_batch(desc, th, check=False),
                           q, -lim, lim, step)
        return rot[0], pos[0], jac

    return eval_fn


def solve_ik(desc: SnakeDescriptor, target: Pose, seed: SnakeConfig,
             opts: IkOptions | None = None) -> IkResult:
    """Solve for module angles bringing the tip to ``target``.

    Returns the best configuration found; ``converged`` is False when the
    tolerances were not met within max_iters (the caller decides whether a
    partial move is acceptable). The result always respects joint limits.
    """
    opts = opts or IkOptions()
    return iterate_dls(_snake_eval(desc), target, seed.as_array(),
                       lambda q: clamp_config(desc, q), opts,
                       restart_seeds=_curl_seeds(desc, target, opts))


def result_config(res: IkResult) -> SnakeConfig:
    return SnakeConfig(angles=tuple(float(v) for v in res.joints))
