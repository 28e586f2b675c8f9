"""Benchmark problems with exact (noiseless) evaluators.

A problem is an objective plus m constraint fields f_i(x) <= 0 on R^d,
a strictly feasible start point, and declared Lipschitz constants. The
exact evaluators are ground truth: the measurement oracle adds noise on
top of them and the safety audit judges feasibility against them. The
solver itself only ever sees noisy measurements.

Two families live here: the unicycle controller-design task (optimize a
linear feedback gain so a simulated vehicle approaches a goal without
entering a circular obstacle) and small analytic problems with known
KKT points used as test fixtures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ContractViolationError, DivergedTrajectoryError, UnknownProblemError

Field = Callable[[np.ndarray], float]


@dataclass
class ProblemSpec:
    """A constrained minimization problem: min f0(x) s.t. f_i(x) <= 0.

    lipschitz is a common Lipschitz bound for the objective and every
    constraint over `box`; grad_lower is the declared lower bound on the
    smoothed max-constraint gradient norm near the boundary. Both are
    inputs the solver trusts, not quantities it can verify.
    """

    name: str
    dim: int
    num_constraints: int
    objective: Field
    constraints: tuple[Field, ...]
    lipschitz: float
    grad_lower: float
    noise_sigma: float
    safe_start: np.ndarray
    box: tuple[np.ndarray, np.ndarray] | None = None
    eval_all: Callable[[np.ndarray], np.ndarray] | None = None
    objective_grad: Callable[[np.ndarray], np.ndarray] | None = None
    constraint_grads: tuple[Callable[[np.ndarray], np.ndarray], ...] | None = None
    solution: dict | None = None

    def __post_init__(self):
        self.safe_start = np.asarray(self.safe_start, dtype=float)
        if self.dim < 1:
            raise ContractViolationError("dim must be a positive integer")
        if self.num_constraints < 1:
            raise ContractViolationError("num_constraints must be a positive integer")
        if self.safe_start.shape != (self.dim,):
            raise ContractViolationError(
                f"safe_start has shape {self.safe_start.shape}, expected ({self.dim},)"
            )
        if not (0.0 < self.grad_lower <= self.lipschitz):
            raise ContractViolationError("need 0 < grad_lower <= lipschitz")
        if self.noise_sigma < 0.0:
            raise ContractViolationError("noise_sigma must be nonnegative")
        if len(self.constraints) != self.num_constraints:
            raise ContractViolationError("constraints length != num_constraints")
        worst = self.max_constraint(self.safe_start)
        if not worst < 0.0:
            raise ContractViolationError(
                f"safe_start is not strictly feasible: max_i f_i(x0) = {worst:.6g}"
            )

    # -- exact evaluation -------------------------------------------------

    def evaluate_all(self, points: np.ndarray) -> np.ndarray:
        """Evaluate [f0, f1, ..., fm] at each row of `points`; (P, m+1)."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if self.eval_all is not None:
            out = np.asarray(self.eval_all(points), dtype=float)
            if out.shape != (points.shape[0], self.num_constraints + 1):
                raise ContractViolationError(
                    f"eval_all returned shape {out.shape}, expected "
                    f"({points.shape[0]}, {self.num_constraints + 1})"
                )
            return out
        out = np.empty((points.shape[0], self.num_constraints + 1))
        for p, x in enumerate(points):
            out[p, 0] = self.objective(x)
            for i, g in enumerate(self.constraints):
                out[p, i + 1] = g(x)
        return out

    def objective_value(self, x: np.ndarray) -> float:
        return float(self.evaluate_all(np.asarray(x)[None, :])[0, 0])

    def constraint_values(self, x: np.ndarray) -> np.ndarray:
        return self.evaluate_all(np.asarray(x)[None, :])[0, 1:]

    def max_constraint(self, x: np.ndarray) -> float:
        """Pointwise max of the constraints; feasibility is max <= 0."""
        return float(self.constraint_values(x).max())

    def objective_batch(self, points: np.ndarray) -> np.ndarray:
        return self.evaluate_all(points)[:, 0]

    def max_constraint_batch(self, points: np.ndarray) -> np.ndarray:
        return self.evaluate_all(points)[:, 1:].max(axis=1)


# ---------------------------------------------------------------------------
# Unicycle controller design
# ---------------------------------------------------------------------------


def _default_gain() -> np.ndarray:
    # Weak proportional gain: speed from position error, turn rate from
    # heading error. Verified safe at problem construction.
    return np.array([[-0.05, -0.05, 0.0], [0.0, 0.0, -0.2]])


@dataclass
class UnicycleConfig:
    """Geometry and discretization for the unicycle task.

    The gain is a 2x3 matrix mapping state (or goal error, with
    error_feedback) to inputs u = (v, omega); the optimization variable
    is its flattening, d = 6. Inputs are clamped to |v| <= v_max,
    |omega| <= omega_max so the declared Lipschitz constant is
    meaningful on the search box.
    """

    horizon: int = 30
    dt: float = 0.1
    start: tuple[float, float, float] = (0.0, 0.0, 0.0)
    goal: tuple[float, float, float] = (4.0, 4.0, 0.0)
    obstacle_center: tuple[float, float] = (2.0, 2.0)
    obstacle_radius: float = 1.0
    initial_gain: np.ndarray = field(default_factory=_default_gain)
    v_max: float = 2.0
    omega_max: float = 2.0
    error_feedback: bool = False

    def __post_init__(self):
        self.initial_gain = np.asarray(self.initial_gain, dtype=float)
        if self.horizon < 1:
            raise ContractViolationError("horizon must be a positive integer")
        if self.dt <= 0.0:
            raise ContractViolationError("dt must be positive")
        if self.obstacle_radius <= 0.0:
            raise ContractViolationError("obstacle_radius must be positive")
        if self.initial_gain.shape != (2, 3):
            raise ContractViolationError("initial_gain must be a 2x3 matrix")
        if self.v_max <= 0.0 or self.omega_max <= 0.0:
            raise ContractViolationError("input bounds must be positive")


def _step(q: np.ndarray, v: np.ndarray, omega: np.ndarray, dt: float) -> np.ndarray:
    """Exact-integration state update for inputs held constant over dt:

        theta' = theta + dt*omega
        dx = v*dt*sinc(dt*omega/2) * cos(theta + dt*omega/2)
        dy = v*dt*sinc(dt*omega/2) * sin(theta + dt*omega/2)

    with sinc(z) = sin(z)/z, sinc(0) = 1, which reproduces the
    continuous-time arc for any dt (straight line in the omega -> 0
    limit). Vectorized over leading axes of q / v / omega.
    """
    half = 0.5 * dt * omega
    ds = v * dt * np.sinc(half / np.pi)  # np.sinc(z/pi) = sin(z)/z
    theta = q[..., 2]
    return q + np.stack(
        [ds * np.cos(theta + half), ds * np.sin(theta + half), dt * omega], axis=-1
    )


def unicycle_step(q, v: float, omega: float, dt: float) -> np.ndarray:
    """One exact-integration update for a single state and input pair."""
    return _step(np.asarray(q, dtype=float), float(v), float(omega), dt)


def simulate_unicycle_batch(gains: np.ndarray, cfg: UnicycleConfig) -> np.ndarray:
    """Simulate a batch of gains; returns states of shape (B, T+1, 3).

    Control is u_{t+1} = U q_t, or U (q_t - q_goal) in error-feedback
    mode, clamped componentwise; the state advances by the exact
    integration step.
    """
    gains = np.asarray(gains, dtype=float)
    if gains.ndim == 2:
        gains = gains[None]
    if not np.isfinite(gains).all():
        raise ContractViolationError("gain matrix must be finite")
    B = gains.shape[0]
    T = cfg.horizon
    goal = np.asarray(cfg.goal, dtype=float)
    traj = np.empty((B, T + 1, 3))
    q = np.tile(np.asarray(cfg.start, dtype=float), (B, 1))
    traj[:, 0] = q
    # Overflow from an unstable gain surfaces as the diverged-trajectory
    # error below, not as runtime warnings.
    with np.errstate(invalid="ignore", over="ignore"):
        for t in range(T):
            feedback = q - goal if cfg.error_feedback else q
            u = np.einsum("bij,bj->bi", gains, feedback)
            v = np.clip(u[:, 0], -cfg.v_max, cfg.v_max)
            w = np.clip(u[:, 1], -cfg.omega_max, cfg.omega_max)
            q = _step(q, v, w, cfg.dt)
            traj[:, t + 1] = q
    if not np.isfinite(traj).all():
        bad = np.flatnonzero(~np.isfinite(traj).all(axis=(0, 2)))
        raise DivergedTrajectoryError(int(bad[0]))
    return traj


def simulate_unicycle(gain: np.ndarray, cfg: UnicycleConfig) -> np.ndarray:
    """Single-gain trajectory, shape (T+1, 3)."""
    return simulate_unicycle_batch(np.asarray(gain, dtype=float)[None], cfg)[0]


def unicycle_objective(gain: np.ndarray, cfg: UnicycleConfig) -> float:
    """Mean squared state distance to the goal: (1/T) sum_t |q_t - q_B|^2."""
    traj = simulate_unicycle(gain, cfg)
    diff = traj[1:] - np.asarray(cfg.goal, dtype=float)
    return float(np.mean(np.sum(diff * diff, axis=1)))


def unicycle_constraint(gain: np.ndarray, t: int, cfg: UnicycleConfig) -> float:
    """Obstacle clearance at step t: r^2 - |p_t - center|^2 (negative = safe)."""
    if not 1 <= t <= cfg.horizon:
        raise ContractViolationError(f"step index {t} outside 1..{cfg.horizon}")
    traj = simulate_unicycle(gain, cfg)
    diff = traj[t, :2] - np.asarray(cfg.obstacle_center, dtype=float)
    return float(cfg.obstacle_radius**2 - diff @ diff)


def make_unicycle_problem(
    cfg: UnicycleConfig | None = None,
    *,
    noise_sigma: float = 1e-4,
    lipschitz: float = 130.0,
    grad_lower: float = 1.0,
    box_halfwidth: float = 0.15,
    name: str = "unicycle",
) -> ProblemSpec:
    """Wrap a unicycle configuration as a ProblemSpec over x = flatten(U).

    One constraint per trajectory step (m = T); no pre-aggregation, the
    algorithm's noisy max does that. The batch evaluator shares one
    simulation per query point across all m+1 fields. The default
    lipschitz value holds empirically on the default box with margin;
    a caller passing a smaller tuned value (as benchmark presets do)
    trades the containment guarantee for larger steps and must judge
    safety from the audit.
    """
    cfg = cfg or UnicycleConfig()
    x0 = cfg.initial_gain.ravel().copy()
    center = np.asarray(cfg.obstacle_center, dtype=float)
    goal = np.asarray(cfg.goal, dtype=float)
    r2 = cfg.obstacle_radius**2
    T = cfg.horizon

    def eval_all(points: np.ndarray) -> np.ndarray:
        gains = points.reshape(points.shape[0], 2, 3)
        traj = simulate_unicycle_batch(gains, cfg)
        diff = traj[:, 1:] - goal
        obj = np.mean(np.sum(diff * diff, axis=2), axis=1)
        pdiff = traj[:, 1:, :2] - center
        cons = r2 - np.sum(pdiff * pdiff, axis=2)
        return np.concatenate([obj[:, None], cons], axis=1)

    def objective(x: np.ndarray) -> float:
        return unicycle_objective(x.reshape(2, 3), cfg)

    def make_con(t: int) -> Field:
        return lambda x: unicycle_constraint(x.reshape(2, 3), t, cfg)

    return ProblemSpec(
        name=name,
        dim=6,
        num_constraints=T,
        objective=objective,
        constraints=tuple(make_con(t) for t in range(1, T + 1)),
        lipschitz=lipschitz,
        grad_lower=grad_lower,
        noise_sigma=noise_sigma,
        safe_start=x0,
        box=(x0 - box_halfwidth, x0 + box_halfwidth),
        eval_all=eval_all,
    )


# ---------------------------------------------------------------------------
# Analytic fixtures with known solutions
# ---------------------------------------------------------------------------


def _linear_ball(noise_sigma: float) -> ProblemSpec:
    # min c.x s.t. |x|^2 - 1 <= 0 with c = (1, 0):
    # stationarity c + 2*lam*x = 0 on the unit circle gives
    # x* = -c/|c| = (-1, 0), lam* = |c|/2 = 0.5.
    c = np.array([1.0, 0.0])

    def eval_all(points):
        return np.stack(
            [points @ c, np.sum(points * points, axis=1) - 1.0], axis=1
        )

    lo = np.array([-1.2, -1.2])
    return ProblemSpec(
        name="linear-ball",
        dim=2,
        num_constraints=1,
        objective=lambda x: float(c @ x),
        constraints=(lambda x: float(x @ x - 1.0),),
        lipschitz=3.5,
        grad_lower=1.0,
        noise_sigma=noise_sigma,
        safe_start=np.zeros(2),
        box=(lo, -lo),
        eval_all=eval_all,
        objective_grad=lambda x: c.copy(),
        constraint_grads=(lambda x: 2.0 * x,),
        solution={
            "x_star": np.array([-1.0, 0.0]),
            "lambda_star": np.array([0.5]),
            "objective_star": -1.0,
        },
    )


def _quadratic_halfspace(noise_sigma: float) -> ProblemSpec:
    # min |x - xbar|^2 s.t. a.x - b <= 0 with xbar infeasible; the optimum
    # is the Euclidean projection of xbar onto the halfspace:
    # xbar = (2, 0), a = (1, 0), b = 1 -> x* = (1, 0), lam* = 2.
    xbar = np.array([2.0, 0.0])
    a = np.array([1.0, 0.0])
    b = 1.0

    def eval_all(points):
        d = points - xbar
        return np.stack([np.sum(d * d, axis=1), points @ a - b], axis=1)

    lo = np.array([-1.5, -1.5])
    return ProblemSpec(
        name="quadratic-halfspace",
        dim=2,
        num_constraints=1,
        objective=lambda x: float((x - xbar) @ (x - xbar)),
        constraints=(lambda x: float(a @ x - b),),
        lipschitz=8.0,
        grad_lower=1.0,
        noise_sigma=noise_sigma,
        safe_start=np.zeros(2),
        box=(lo, -lo),
        eval_all=eval_all,
        objective_grad=lambda x: 2.0 * (x - xbar),
        constraint_grads=(lambda x: a.copy(),),
        solution={
            "x_star": np.array([1.0, 0.0]),
            "lambda_star": np.array([2.0]),
            "objective_star": 1.0,
        },
    )


def _smooth_two_constraints(noise_sigma: float) -> ProblemSpec:
    # min -x2 inside the lens of two unit disks centered (0,0) and (1,0).
    # Both constraints are active at x* = (0.5, sqrt(3)/2); stationarity
    # (0,-1) + lam1*(1, sqrt3) + lam2*(-1, sqrt3) = 0 gives
    # lam1 = lam2 = 1/(2*sqrt(3)). Exercises the max-aggregated
    # constraint with a genuinely two-sided corner.
    c1 = np.array([0.0, 0.0])
    c2 = np.array([1.0, 0.0])

    def eval_all(points):
        d1 = points - c1
        d2 = points - c2
        return np.stack(
            [
                -points[:, 1],
                np.sum(d1 * d1, axis=1) - 1.0,
                np.sum(d2 * d2, axis=1) - 1.0,
            ],
            axis=1,
        )

    root3 = math.sqrt(3.0)
    return ProblemSpec(
        name="smooth-2con",
        dim=2,
        num_constraints=2,
        objective=lambda x: float(-x[1]),
        constraints=(
            lambda x: float((x - c1) @ (x - c1) - 1.0),
            lambda x: float((x - c2) @ (x - c2) - 1.0),
        ),
        lipschitz=3.7,
        grad_lower=1.4,
        noise_sigma=noise_sigma,
        safe_start=np.array([0.5, 0.0]),
        box=(np.array([-0.5, -1.05]), np.array([1.5, 1.05])),
        eval_all=eval_all,
        objective_grad=lambda x: np.array([0.0, -1.0]),
        constraint_grads=(lambda x: 2.0 * (x - c1), lambda x: 2.0 * (x - c2)),
        solution={
            "x_star": np.array([0.5, root3 / 2.0]),
            "lambda_star": np.array([1.0 / (2.0 * root3), 1.0 / (2.0 * root3)]),
            "objective_star": -root3 / 2.0,
        },
    )


def _sphere_quadratic(noise_sigma: float) -> ProblemSpec:
    # min |x|^2 inside a wide ball |x|^2 <= 25 (constraint never active);
    # unconstrained optimum x* = 0, lam* = 0. Fixture for estimator
    # statistics at points like (1, 0) where grad f0 = (2, 0) exactly.
    def eval_all(points):
        sq = np.sum(points * points, axis=1)
        return np.stack([sq, sq - 25.0], axis=1)

    lo = np.array([-1.25, -1.25])
    return ProblemSpec(
        name="sphere-quadratic",
        dim=2,
        num_constraints=1,
        objective=lambda x: float(x @ x),
        constraints=(lambda x: float(x @ x - 25.0),),
        lipschitz=3.6,
        grad_lower=2.0,
        noise_sigma=noise_sigma,
        safe_start=np.array([1.0, 0.0]),
        box=(lo, -lo),
        eval_all=eval_all,
        objective_grad=lambda x: 2.0 * x,
        constraint_grads=(lambda x: 2.0 * x,),
        solution={
            "x_star": np.zeros(2),
            "lambda_star": np.array([0.0]),
            "objective_star": 0.0,
        },
    )


_ANALYTIC: dict[str, Callable[[float], ProblemSpec]] = {
    "linear-ball": _linear_ball,
    "quadratic-halfspace": _quadratic_halfspace,
    "smooth-2con": _smooth_two_constraints,
    "sphere-quadratic": _sphere_quadratic,
}


def analytic_names() -> tuple[str, ...]:
    return tuple(sorted(_ANALYTIC))


def analytic_problem(name: str, noise_sigma: float = 0.01) -> ProblemSpec:
    """Build a registered analytic benchmark with a documented solution."""
    try:
        builder = _ANALYTIC[name]
    except KeyError:
        raise UnknownProblemError(
            f"unknown analytic problem {name!r}; registered: {', '.join(analytic_names())}"
        ) from None
    return builder(noise_sigma)
