"""Safe zeroth-order log-barrier descent.

The solver minimizes a smoothed log barrier of the problem using only
noisy function values served by the measurement oracle. Each iteration
k = 1..K at the current iterate:

  1. measures every function n_k times at the iterate (base side),
  2. forms per-constraint upper confidence bounds and the certified
     margin alpha_k (halting or freezing if the margin is exhausted),
  3. measures at nu_k-displaced sphere points (perturbed side),
  4. assembles the barrier-gradient estimate
     g_k = G0 + eta * Gc / alpha_k,
  5. steps x -= gamma_k * g_k with
     gamma_k = min(alpha_k / (2 L k^(2/5)), k^(-3/5)) / |g_k|,

so the step length never exceeds alpha_k / (2L): one step cannot cross
the constraint boundary when L is honest. The returned point x_R is
drawn from the trace with probability proportional to gamma_k * |g_k|,
with multiplier lambda_R = eta / alpha_R.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import (
    ContractViolationError,
    DivergedTrajectoryError,
    MarginExhaustedError,
    NoValidOutputError,
    UnsafeStartError,
)
from .estimator import (
    MAX_CONSTRAINT,
    OBJECTIVE,
    barrier_gradient,
    confidence_bounds,
    estimate_gradient,
    margin,
    sphere_sample,
)
from .oracle import MeasurementBatch, MeasurementOracle
from .problems import ProblemSpec
from .smoothing import smoothed_gradient
from .streams import DOMAIN_DIRECTIONS, DOMAIN_OUTPUT, as_generator, substream

logger = logging.getLogger(__name__)

N_POLICIES = ("fixed", "theoretical")
NU_POLICIES = ("fixed", "adaptive")
MARGIN_POLICIES = ("halt", "freeze")


@dataclass
class AlgoConfig:
    """Run parameters.

    The margin constant C defaults to l^2 / (8 L^2) from the problem's
    declared constants; C_override sidesteps the (often unknowable) l.
    nu_policy "fixed" uses nu = C*eta/L throughout (the theory setting);
    "adaptive" re-derives nu_k = min(eta/L, alpha_k/L) each iteration
    from that iteration's own base measurements. n_policy "theoretical"
    derives n_k from the concentration bound and clamps it to n_cap with
    a warning; "fixed" uses n_fixed.
    """

    eta: float
    max_iters: int
    delta: float = 0.05
    n_policy: str = "fixed"
    n_fixed: int | None = None
    n_cap: int = 4096
    nu_policy: str = "fixed"
    C_override: float | None = None
    margin_policy: str = "halt"
    seed: int = 0

    def __post_init__(self):
        if self.eta <= 0.0:
            raise ContractViolationError("eta must be positive")
        if not 0.0 < self.delta < 1.0:
            raise ContractViolationError("delta must lie in (0, 1)")
        if self.max_iters < 0:
            raise ContractViolationError("max_iters must be >= 0")
        if self.n_policy not in N_POLICIES:
            raise ContractViolationError(f"n_policy must be one of {N_POLICIES}")
        if self.nu_policy not in NU_POLICIES:
            raise ContractViolationError(f"nu_policy must be one of {NU_POLICIES}")
        if self.margin_policy not in MARGIN_POLICIES:
            raise ContractViolationError(f"margin_policy must be one of {MARGIN_POLICIES}")
        if self.n_policy == "fixed" and (self.n_fixed is None or self.n_fixed < 1):
            raise ContractViolationError("fixed n policy requires n_fixed >= 1")
        if self.n_cap < 1:
            raise ContractViolationError("n_cap must be >= 1")
        if self.C_override is not None and self.C_override <= 0.0:
            raise ContractViolationError("C_override must be positive")


@dataclass
class IterateRecord:
    """Per-iteration trace entry; x is the point the iteration measured at."""

    k: int
    x: np.ndarray
    alpha_hat: float
    g: np.ndarray
    g_norm: float
    gamma: float
    weight: float  # gamma * |g| = min(alpha/(2 L k^0.4), k^-0.6)
    nu: float
    fhat: np.ndarray
    scalar_calls_so_far: int
    directions_so_far: int
    frozen: bool = False


@dataclass
class KktCertificate:
    """Output pair (x_R, lambda_R) plus per-constraint multipliers."""

    x: np.ndarray
    iteration: int
    lambda_scalar: float  # eta / alpha_R
    lambda_hat: np.ndarray  # per-constraint multipliers, argmax mass split
    fhat: np.ndarray
    fhat_c_nu: float
    alpha_hat: float
    complementarity: np.ndarray  # lambda_hat[i] * (-fhat[i])
    stationarity_norm: float | None = None


class KktResiduals(NamedTuple):
    feasibility: float  # max_i true f_i(x_R)
    complementarity: float  # max_i lambda_hat[i] * (-true f_i(x_R))
    stationarity: float  # |grad f0 + sum lambda_hat[i] grad f_i|


@dataclass
class RunResult:
    problem_name: str
    config: AlgoConfig
    trace: list[IterateRecord]
    x_final: np.ndarray
    certificate: KktCertificate | None
    audit: object  # SafetyAudit
    residuals: KktResiduals | None = None
    halted_reason: str | None = None  # None | "margin-exhausted" | "diverged"
    halted_at: int | None = None


# ---------------------------------------------------------------------------
# Parameter derivation
# ---------------------------------------------------------------------------


def sigma_big(d: int, delta: float, K: int, sigma: float, lipschitz: float, nu: float) -> float:
    """Concentration constant

        (d+1) * sqrt(ln(1/delta) + ln(2K+1)) * (sqrt(2)*sigma + L*nu)

    controlling the deviation of the gradient estimators across a run of
    K iterations at confidence delta.
    """
    if d < 1:
        raise ContractViolationError("d must be >= 1")
    if not 0.0 < delta < 1.0:
        raise ContractViolationError("delta must lie in (0, 1)")
    if K < 0:
        raise ContractViolationError("K must be >= 0")
    if sigma < 0.0 or nu < 0.0 or lipschitz <= 0.0:
        raise ContractViolationError("sigma, nu must be >= 0 and L > 0")
    return (
        (d + 1)
        * math.sqrt(math.log(1.0 / delta) + math.log(2 * K + 1))
        * (math.sqrt(2.0) * sigma + lipschitz * nu)
    )


def required_samples(sigma_bound: float, nu: float, C: float, lipschitz: float) -> int:
    """Per-iteration sample count guaranteeing the certified margin stays
    above C*eta for a whole run: ceil(4*Sigma^2*(C+1)^2 / (nu^2 C^2 L^2))."""
    if sigma_bound <= 0.0 or nu <= 0.0 or C <= 0.0 or lipschitz <= 0.0:
        raise ContractViolationError("all arguments must be positive")
    bound = 4.0 * sigma_bound**2 * (C + 1.0) ** 2 / (nu**2 * C**2 * lipschitz**2)
    return max(1, math.ceil(bound))


def step_weight(k: int, alpha_hat: float, lipschitz: float) -> float:
    """Step length min(alpha/(2 L k^(2/5)), k^(-3/5)); the first branch is
    what makes a single step unable to cross the boundary."""
    if k < 1:
        raise ContractViolationError("k must be >= 1")
    if alpha_hat <= 0.0:
        raise ContractViolationError("alpha_hat must be positive")
    return min(alpha_hat / (2.0 * lipschitz * k ** (2.0 / 5.0)), 1.0 / k ** (3.0 / 5.0))


def step_size(k: int, alpha_hat: float, g_norm: float, lipschitz: float) -> float:
    """gamma_k = step_weight / |g_k|; the update is x -= gamma_k * g_k."""
    if g_norm <= 0.0:
        raise ContractViolationError("degenerate gradient: |g| must be positive")
    return step_weight(k, alpha_hat, lipschitz) / g_norm


def _adaptive_margin(max_fhat: float, eta: float, lipschitz: float) -> tuple[float, float]:
    """Solve nu = min(eta/L, alpha/L) jointly with alpha = -(max_fhat + nu*L).

    With M = max_i fhat[i] < 0: for M <= -2*eta the eta/L branch binds and
    alpha = -M - eta; otherwise nu = alpha/L self-consistently gives
    alpha = -M/2. Raises MarginExhaustedError when M >= 0.
    """
    if max_fhat >= 0.0:
        raise MarginExhaustedError(max_fhat)
    if max_fhat <= -2.0 * eta:
        return eta / lipschitz, -max_fhat - eta
    alpha = -max_fhat / 2.0
    return alpha / lipschitz, alpha


def plan_iterations(
    eta: float,
    lipschitz: float,
    C: float,
    d: int,
    d_f_estimate: float,
) -> dict:
    """Iteration-count planning helper: the three lower-bound terms whose
    max drives the E|grad B(x_R)| <= 5*eta guarantee. d_f_estimate is the
    user's guess at the initial barrier suboptimality gap (unobservable)."""
    t1 = (lipschitz * d_f_estimate / (C * eta**2)) ** 2.5
    t2 = (lipschitz**2 * math.sqrt(d) * (1.0 + 1.0 / C) / (C**2 * eta**3)) ** (5.0 / 3.0)
    t3 = (5.0 * math.log(1.0 / eta) / (C * eta)) ** 5 if eta < 1.0 else 0.0
    return {
        "term_gap": t1,
        "term_dimension": t2,
        "term_log": t3,
        "K_required": math.ceil(max(t1, t2, t3)),
    }


# ---------------------------------------------------------------------------
# Output selection and certificates
# ---------------------------------------------------------------------------


def select_output(weights, rng) -> int:
    """Sample an iteration index R with P(R = k) proportional to the
    recorded weight gamma_k * |g_k|; returns a 1-based index."""
    w = np.asarray(weights, dtype=float)
    if w.size == 0 or np.all(w <= 0.0):
        raise NoValidOutputError("no positive weights to sample from")
    if np.any(w < 0.0):
        raise ContractViolationError("weights must be nonnegative")
    gen = as_generator(rng)
    return int(gen.choice(w.size, p=w / w.sum())) + 1


def kkt_multipliers(fhat: np.ndarray, fhat_c_nu: float, eta: float) -> np.ndarray:
    """Per-constraint multipliers: mass eta / (-fhat_c_nu) on the argmax of
    the constraint bounds, split equally across exact ties (keeps
    sum(lambda) = eta / (-fhat_c_nu)), zero elsewhere."""
    if fhat_c_nu >= 0.0:
        raise MarginExhaustedError(fhat_c_nu)
    fhat = np.asarray(fhat, dtype=float)
    maximizers = fhat == fhat.max()
    lam = np.zeros_like(fhat)
    lam[maximizers] = eta / (-fhat_c_nu) / maximizers.sum()
    return lam


def certificate_from_record(record: IterateRecord, eta: float) -> KktCertificate:
    """Build the output certificate for one trace entry."""
    fhat_c_nu = -record.alpha_hat
    lam = kkt_multipliers(record.fhat, fhat_c_nu, eta)
    return KktCertificate(
        x=record.x.copy(),
        iteration=record.k,
        lambda_scalar=eta / record.alpha_hat,
        lambda_hat=lam,
        fhat=record.fhat.copy(),
        fhat_c_nu=fhat_c_nu,
        alpha_hat=record.alpha_hat,
        complementarity=lam * (-record.fhat),
    )


def kkt_residuals(
    problem: ProblemSpec,
    certificate: KktCertificate,
    nu: float,
    n_mc: int = 4096,
    rng=0,
) -> KktResiduals:
    """Ground-truth diagnostic residuals at the certificate point.

    Stationarity uses the problem's analytic gradients when available,
    otherwise the Monte-Carlo smoothed gradients at radius nu.
    """
    x = certificate.x
    true_cons = problem.constraint_values(x)
    lam = certificate.lambda_hat
    r1 = float(true_cons.max())
    r2 = float((lam * (-true_cons)).max()) if lam.size else 0.0
    if problem.objective_grad is not None and problem.constraint_grads is not None:
        grad = problem.objective_grad(x).astype(float).copy()
        for lam_i, g_i in zip(lam, problem.constraint_grads):
            if lam_i != 0.0:
                grad += lam_i * g_i(x)
    else:
        gen = as_generator(rng)
        grad = smoothed_gradient(
            problem.objective_batch, x, nu, n_mc, gen, vectorized=True
        ).grad.copy()
        for i, lam_i in enumerate(lam):
            if lam_i != 0.0:
                field_i = lambda pts, i=i: problem.evaluate_all(pts)[:, i + 1]
                grad += lam_i * smoothed_gradient(
                    field_i, x, nu, n_mc, gen, vectorized=True
                ).grad
    return KktResiduals(r1, r2, float(np.linalg.norm(grad)))


# ---------------------------------------------------------------------------
# Main loop
# ---------------------------------------------------------------------------


def resolve_sample_count(problem: ProblemSpec, cfg: AlgoConfig, sigma: float) -> int:
    """n_k for the run; theoretical policy clamps to n_cap with a warning."""
    if cfg.n_policy == "fixed":
        return int(cfg.n_fixed)
    L = problem.lipschitz
    C = cfg.C_override if cfg.C_override is not None else problem.grad_lower**2 / (8.0 * L**2)
    nu = C * cfg.eta / L
    required = required_samples(
        sigma_big(problem.dim, cfg.delta, cfg.max_iters, sigma, L, nu), nu, C, L
    )
    if required > cfg.n_cap:
        logger.warning(
            "theoretical sample bound n_k = %d exceeds cap %d; clamping "
            "(margin guarantee no longer covered by the bound)",
            required,
            cfg.n_cap,
        )
        return cfg.n_cap
    return required


def run(problem: ProblemSpec, cfg: AlgoConfig, oracle: MeasurementOracle) -> RunResult:
    """Execute K iterations and sample the output pair.

    The start point is accepted only if every constraint's upper
    confidence bound at it is negative (the solver cannot see true
    values). Margin exhaustion is handled per cfg.margin_policy: "halt"
    returns a flagged partial trace, "freeze" records a zero-weight
    iterate and re-measures next iteration. A diverged problem
    evaluation aborts with the trace collected so far.
    """
    L = problem.lipschitz
    C = cfg.C_override if cfg.C_override is not None else problem.grad_lower**2 / (8.0 * L**2)
    K = cfg.max_iters
    delta_bar = cfg.delta / (2 * K + 1)
    nu_fixed = C * cfg.eta / L
    sigma = oracle.noise.sigma
    n = resolve_sample_count(problem, cfg, sigma)

    x = np.asarray(problem.safe_start, dtype=float).copy()
    records: list[IterateRecord] = []
    halted_reason: str | None = None
    halted_at: int | None = None
    start_checked = False

    for k in range(1, K + 1):
        try:
            base = oracle.measure_base(x, n, k)
        except DivergedTrajectoryError:
            halted_reason, halted_at = "diverged", k
            break
        fhat = confidence_bounds(base, sigma, delta_bar)
        if not start_checked:
            if fhat.max() >= 0.0:
                raise UnsafeStartError(
                    f"start point not certifiably feasible: max upper bound "
                    f"{fhat.max():.6g} >= 0"
                )
            start_checked = True
        try:
            if cfg.nu_policy == "adaptive":
                nu_k, alpha = _adaptive_margin(float(fhat.max()), cfg.eta, L)
            else:
                nu_k = nu_fixed
                _, alpha = margin(fhat, nu_k, L)
        except MarginExhaustedError as exc:
            if cfg.margin_policy == "halt":
                logger.warning("margin exhausted at iteration %d: %s", k, exc)
                halted_reason, halted_at = "margin-exhausted", k
                break
            records.append(
                IterateRecord(
                    k=k,
                    x=x.copy(),
                    alpha_hat=float("nan"),
                    g=np.zeros_like(x),
                    g_norm=0.0,
                    gamma=0.0,
                    weight=0.0,
                    nu=float("nan"),
                    fhat=fhat,
                    scalar_calls_so_far=oracle.total_scalar_calls,
                    directions_so_far=oracle.total_directions,
                    frozen=True,
                )
            )
            continue
        directions = sphere_sample(
            problem.dim, n, substream(cfg.seed, DOMAIN_DIRECTIONS, k)
        )
        try:
            pert = oracle.measure_perturbed(x, directions, nu_k, k)
        except DivergedTrajectoryError:
            halted_reason, halted_at = "diverged", k
            break
        batch = MeasurementBatch(
            iteration=k,
            base_point=x.copy(),
            directions=directions,
            radius=nu_k,
            base_values=base,
            perturbed_values=pert,
        )
        g0 = estimate_gradient(batch, OBJECTIVE)
        gc = estimate_gradient(batch, MAX_CONSTRAINT)
        g = barrier_gradient(g0, gc, cfg.eta, alpha)
        g_norm = float(np.linalg.norm(g))
        if g_norm == 0.0:
            # No direction information; weight 0 removes it from output sampling.
            records.append(
                IterateRecord(
                    k=k,
                    x=x.copy(),
                    alpha_hat=alpha,
                    g=g,
                    g_norm=0.0,
                    gamma=0.0,
                    weight=0.0,
                    nu=nu_k,
                    fhat=fhat,
                    scalar_calls_so_far=oracle.total_scalar_calls,
                    directions_so_far=oracle.total_directions,
                )
            )
            continue
        weight = step_weight(k, alpha, L)
        gamma = weight / g_norm
        records.append(
            IterateRecord(
                k=k,
                x=x.copy(),
                alpha_hat=alpha,
                g=g,
                g_norm=g_norm,
                gamma=gamma,
                weight=weight,
                nu=nu_k,
                fhat=fhat,
                scalar_calls_so_far=oracle.total_scalar_calls,
                directions_so_far=oracle.total_directions,
            )
        )
        x = x - gamma * g

    certificate = None
    if halted_reason is None and records:
        weights = np.array([r.weight for r in records])
        if np.any(weights > 0.0):
            R = select_output(weights, substream(cfg.seed, DOMAIN_OUTPUT))
            certificate = certificate_from_record(records[R - 1], cfg.eta)
    return RunResult(
        problem_name=problem.name,
        config=cfg,
        trace=records,
        x_final=x,
        certificate=certificate,
        audit=oracle.audit(),
        halted_reason=halted_reason,
        halted_at=halted_at,
    )
