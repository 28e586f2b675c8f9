import dataclasses
import math

import numpy as np
import pytest

from zobarrier.errors import (
    ContractViolationError,
    MarginExhaustedError,
    NoValidOutputError,
    UnsafeStartError,
)
from zobarrier.oracle import MeasurementOracle, NoiseModel
from zobarrier.problems import ProblemSpec, analytic_problem
from zobarrier.smoothing import barrier_value_and_grad
from zobarrier.solver import (
    AlgoConfig,
    KktCertificate,
    certificate_from_record,
    kkt_multipliers,
    kkt_residuals,
    plan_iterations,
    required_samples,
    resolve_sample_count,
    run,
    select_output,
    sigma_big,
    step_size,
    step_weight,
)
from zobarrier.streams import substream


def make_oracle(problem, sigma=None, seed=0, kind="gaussian"):
    sigma = problem.noise_sigma if sigma is None else sigma
    if sigma == 0.0:
        kind = "none"
    return MeasurementOracle(problem, NoiseModel(kind=kind, sigma=sigma, master_seed=seed))


def flat_problem(constraint_level=-1.0):
    """Constant objective and constraint: every gradient estimate is zero."""
    m = float(constraint_level)
    return ProblemSpec(
        name="flat",
        dim=2,
        num_constraints=1,
        objective=lambda x: 1.0,
        constraints=(lambda x: m,),
        lipschitz=1.0,
        grad_lower=1.0,
        noise_sigma=0.0,
        safe_start=np.zeros(2),
        eval_all=lambda pts: np.stack(
            [np.ones(pts.shape[0]), np.full(pts.shape[0], m)], axis=1
        ),
    )


# -- parameter derivation ----------------------------------------------------


def test_sigma_big_values():
    # d=1, delta=1/e, K=0, sigma=0, L=1, nu=1: 2 * sqrt(1 + 0) * 1 = 2.
    assert sigma_big(1, math.exp(-1.0), 0, 0.0, 1.0, 1.0) == pytest.approx(2.0)
    # sigma = 0 drops the noise term entirely.
    got = sigma_big(3, 0.1, 10, 0.0, 2.0, 0.5)
    assert got == pytest.approx(4 * math.sqrt(math.log(10.0) + math.log(21.0)) * 1.0)


def test_sigma_big_monotone():
    base = sigma_big(2, 0.1, 10, 0.5, 1.0, 0.1)
    assert sigma_big(2, 0.1, 10, 1.0, 1.0, 0.1) > base
    assert sigma_big(2, 0.1, 10, 0.5, 1.0, 0.2) > base
    assert sigma_big(2, 0.1, 20, 0.5, 1.0, 0.1) > base
    assert sigma_big(3, 0.1, 10, 0.5, 1.0, 0.1) > base
    with pytest.raises(ContractViolationError):
        sigma_big(2, 1.5, 10, 0.5, 1.0, 0.1)


def test_required_samples_equality_point():
    # Sigma = nu*L*C / (2(C+1)) makes the bound exactly one sample.
    nu = lipschitz = C = 1.0
    sigma_bound = nu * lipschitz * C / (2.0 * (C + 1.0))
    assert required_samples(sigma_bound, nu, C, lipschitz) == 1


def test_required_samples_quadratic_in_sigma():
    assert required_samples(0.5, 1.0, 1.0, 1.0) == 4
    assert required_samples(1.0, 1.0, 1.0, 1.0) == 16
    with pytest.raises(ContractViolationError):
        required_samples(0.0, 1.0, 1.0, 1.0)


def test_step_size_values():
    assert step_size(1, 1.0, 2.0, 1.0) == pytest.approx(0.25)
    # k = 32: k^(2/5) = 4 and k^(3/5) = 8, both branches equal 1/8.
    assert step_size(32, 1.0, 1.0, 1.0) == pytest.approx(0.125)
    assert step_weight(32, 1.0, 1.0) == pytest.approx(0.125)
    with pytest.raises(ContractViolationError):
        step_size(1, 1.0, 0.0, 1.0)
    with pytest.raises(ContractViolationError):
        step_size(0, 1.0, 1.0, 1.0)
    with pytest.raises(ContractViolationError):
        step_weight(1, 0.0, 1.0)


def test_step_weight_never_exceeds_margin_over_2l():
    rng = substream(15)
    for _ in range(300):
        k = int(rng.integers(1, 5000))
        alpha = float(rng.uniform(1e-4, 5.0))
        lipschitz = float(rng.uniform(0.1, 50.0))
        assert step_weight(k, alpha, lipschitz) <= alpha / (2.0 * lipschitz)


def test_resolve_sample_count_policies(caplog):
    prob = analytic_problem("smooth-2con")
    fixed = AlgoConfig(eta=0.3, max_iters=10, n_policy="fixed", n_fixed=9)
    assert resolve_sample_count(prob, fixed, sigma=0.01) == 9
    theo = AlgoConfig(eta=0.3, max_iters=10, n_policy="theoretical", n_cap=512)
    with caplog.at_level("WARNING"):
        n = resolve_sample_count(prob, theo, sigma=0.01)
    assert n == 512
    assert any("exceeds cap" in r.message for r in caplog.records)


def test_plan_iterations_reports_terms():
    plan = plan_iterations(eta=0.1, lipschitz=2.0, C=0.01, d=4, d_f_estimate=1.0)
    assert plan["K_required"] == math.ceil(
        max(plan["term_gap"], plan["term_dimension"], plan["term_log"])
    )
    assert plan["term_gap"] > 0 and plan["term_dimension"] > 0


# -- output sampling ---------------------------------------------------------


def test_select_output_single_weight():
    for _ in range(5):
        assert select_output([0.0, 0.0, 2.5, 0.0], substream(1)) == 3


def test_select_output_all_zero():
    with pytest.raises(NoValidOutputError):
        select_output([0.0, 0.0], substream(1))
    with pytest.raises(NoValidOutputError):
        select_output([], substream(1))


def test_select_output_frequencies():
    rng = substream(44)
    draws = 100_000
    counts = np.zeros(2)
    for _ in range(draws):
        counts[select_output([1.0, 3.0], rng) - 1] += 1
    p_hat = counts[1] / draws
    assert abs(p_hat - 0.75) <= 3.0 * math.sqrt(0.75 * 0.25 / draws)


def test_select_output_uniform_for_equal_weights():
    rng = substream(45)
    draws = 40_000
    counts = np.zeros(4)
    for _ in range(draws):
        counts[select_output(np.ones(4), rng) - 1] += 1
    assert np.abs(counts / draws - 0.25).max() <= 3.0 * math.sqrt(0.25 * 0.75 / draws)


# -- multipliers and residuals -----------------------------------------------


def test_kkt_multipliers_single_constraint():
    lam = kkt_multipliers(np.array([-0.4]), -0.4, eta=0.1)
    assert lam[0] == pytest.approx(0.25)


def test_kkt_multipliers_unique_argmax():
    lam = kkt_multipliers(np.array([-1.0, -2.0]), -0.9, eta=0.1)
    assert lam[1] == 0.0
    assert abs(lam[0] - 1.0 / 9.0) < 1e-15


def test_kkt_multipliers_tie_splits_mass():
    lam = kkt_multipliers(np.array([-1.0, -1.0]), -0.9, eta=0.1)
    assert lam[0] == lam[1] == pytest.approx(0.1 / 0.9 / 2.0)
    assert lam.sum() == pytest.approx(0.1 / 0.9)


def test_kkt_multipliers_margin_guard():
    with pytest.raises(MarginExhaustedError):
        kkt_multipliers(np.array([-1.0]), 0.0, eta=0.1)


def test_kkt_residuals_exact_point():
    prob = analytic_problem("linear-ball")
    x_star = prob.solution["x_star"]
    cert = KktCertificate(
        x=x_star,
        iteration=1,
        lambda_scalar=0.5,
        lambda_hat=prob.solution["lambda_star"],
        fhat=np.array([0.0]),
        fhat_c_nu=-0.1,
        alpha_hat=0.1,
        complementarity=np.array([0.0]),
    )
    res = kkt_residuals(prob, cert, nu=0.01)
    assert res.feasibility == pytest.approx(0.0, abs=1e-12)
    assert res.complementarity == pytest.approx(0.0, abs=1e-12)
    assert res.stationarity == pytest.approx(0.0, abs=1e-12)


def test_kkt_residuals_interior_zero_multipliers():
    prob = analytic_problem("sphere-quadratic")
    cert = KktCertificate(
        x=np.zeros(2),
        iteration=1,
        lambda_scalar=0.0,
        lambda_hat=np.array([0.0]),
        fhat=np.array([-25.0]),
        fhat_c_nu=-25.0,
        alpha_hat=25.0,
        complementarity=np.array([0.0]),
    )
    res = kkt_residuals(prob, cert, nu=0.01)
    assert res.complementarity == 0.0
    assert res.stationarity == pytest.approx(0.0, abs=1e-12)


def test_kkt_residuals_smoothing_fallback():
    # Strip the analytic gradients to force the Monte-Carlo path.
    prob = analytic_problem("linear-ball")
    stripped = dataclasses.replace(prob, objective_grad=None, constraint_grads=None)
    cert = KktCertificate(
        x=np.array([-0.5, 0.0]),
        iteration=1,
        lambda_scalar=0.2,
        lambda_hat=np.array([0.2]),
        fhat=np.array([-0.7]),
        fhat_c_nu=-0.7,
        alpha_hat=0.7,
        complementarity=np.array([0.14]),
    )
    got = kkt_residuals(stripped, cert, nu=0.05, n_mc=200_000, rng=9)
    want = kkt_residuals(prob, cert, nu=0.05)
    assert got.feasibility == want.feasibility
    assert got.stationarity == pytest.approx(want.stationarity, abs=0.02)


# -- run loop ----------------------------------------------------------------


def ball_config(**overrides):
    base = dict(
        eta=0.05,
        delta=0.05,
        max_iters=150,
        n_policy="fixed",
        n_fixed=8,
        nu_policy="adaptive",
        seed=11,
    )
    base.update(overrides)
    return AlgoConfig(**base)


def test_run_zero_iterations():
    prob = analytic_problem("linear-ball")
    result = run(prob, ball_config(max_iters=0), make_oracle(prob, seed=1))
    assert result.trace == []
    assert np.array_equal(result.x_final, prob.safe_start)
    assert result.certificate is None
    assert result.audit.total_scalar_calls == 0


def test_run_is_deterministic():
    prob = analytic_problem("linear-ball", noise_sigma=0.02)
    a = run(prob, ball_config(), make_oracle(prob, seed=5))
    b = run(prob, ball_config(), make_oracle(prob, seed=5))
    assert len(a.trace) == len(b.trace)
    for ra, rb in zip(a.trace, b.trace):
        assert np.array_equal(ra.x, rb.x)
        assert np.array_equal(ra.g, rb.g)
        assert ra.gamma == rb.gamma and ra.alpha_hat == rb.alpha_hat
    assert np.array_equal(a.x_final, b.x_final)
    assert a.certificate.iteration == b.certificate.iteration
    assert np.array_equal(a.certificate.x, b.certificate.x)


def test_trace_internal_consistency():
    prob = analytic_problem("linear-ball", noise_sigma=0.02)
    result = run(prob, ball_config(max_iters=100), make_oracle(prob, seed=6))
    L = prob.lipschitz
    for rec in result.trace:
        if rec.g_norm == 0.0 or rec.frozen:
            continue
        # Stored step quantities reproduce bitwise from (k, alpha, |g|, L).
        assert rec.weight == step_weight(rec.k, rec.alpha_hat, L)
        assert rec.gamma == step_size(rec.k, rec.alpha_hat, rec.g_norm, L)
        # Adaptive radius satisfies nu_k = min(eta/L, alpha_k/L) exactly.
        assert rec.nu == min(0.05 / L, rec.alpha_hat / L)
    # Consecutive-iterate displacement equals the recorded weight.
    for prev, nxt in zip(result.trace, result.trace[1:]):
        step = np.linalg.norm(nxt.x - prev.x)
        assert step == pytest.approx(prev.weight, rel=1e-12)
        assert step <= prev.alpha_hat / (2.0 * L * prev.k ** 0.4) * (1 + 1e-12)


def test_budget_counters_cumulative():
    prob = analytic_problem("linear-ball", noise_sigma=0.02)
    result = run(prob, ball_config(max_iters=20), make_oracle(prob, seed=8))
    m1 = prob.num_constraints + 1
    for rec in result.trace:
        assert rec.scalar_calls_so_far == rec.k * 2 * 8 * m1
        assert rec.directions_so_far == rec.k * 8
    assert result.audit.total_scalar_calls == 20 * 2 * 8 * m1


def test_zero_gradient_records_zero_weight():
    prob = flat_problem()
    result = run(prob, ball_config(max_iters=10, nu_policy="fixed"), make_oracle(prob))
    assert len(result.trace) == 10
    assert all(rec.weight == 0.0 and rec.gamma == 0.0 for rec in result.trace)
    assert np.array_equal(result.x_final, prob.safe_start)
    assert result.certificate is None
    assert result.halted_reason is None


def test_margin_policy_halt():
    # Fixed radius with C_override = 1 makes nu*L = eta > |constraint|,
    # so the certified margin is exhausted at the first iteration.
    prob = flat_problem(constraint_level=-0.05)
    cfg = ball_config(
        max_iters=10, nu_policy="fixed", C_override=1.0, eta=0.1, margin_policy="halt"
    )
    result = run(prob, cfg, make_oracle(prob))
    assert result.halted_reason == "margin-exhausted"
    assert result.halted_at == 1
    assert result.trace == []
    assert result.certificate is None


def test_margin_policy_freeze():
    prob = flat_problem(constraint_level=-0.05)
    cfg = ball_config(
        max_iters=10, nu_policy="fixed", C_override=1.0, eta=0.1, margin_policy="freeze"
    )
    result = run(prob, cfg, make_oracle(prob))
    assert result.halted_reason is None
    assert len(result.trace) == 10
    assert all(rec.frozen and rec.weight == 0.0 for rec in result.trace)
    assert np.array_equal(result.x_final, prob.safe_start)
    # Frozen iterations take base measurements only.
    assert result.audit.total_directions == 0
    assert result.audit.total_scalar_calls == 10 * 8 * 2


def test_unsafe_start_detected():
    # Feasible in truth but far from certifiable under huge noise.
    prob = flat_problem(constraint_level=-0.01)
    prob = dataclasses.replace(prob, noise_sigma=100.0)
    cfg = ball_config(max_iters=5, nu_policy="fixed")
    with pytest.raises(UnsafeStartError):
        run(prob, cfg, make_oracle(prob, sigma=100.0, seed=3))


def test_certificate_structure():
    prob = analytic_problem("linear-ball", noise_sigma=0.02)
    result = run(prob, ball_config(), make_oracle(prob, seed=12))
    cert = result.certificate
    rec = result.trace[cert.iteration - 1]
    assert np.array_equal(cert.x, rec.x)
    assert cert.alpha_hat == rec.alpha_hat
    assert cert.lambda_scalar == 0.05 / rec.alpha_hat
    assert cert.lambda_hat.shape == (1,)
    assert cert.lambda_hat[0] >= 0.0
    assert np.allclose(cert.complementarity, cert.lambda_hat * (-cert.fhat))
    rebuilt = certificate_from_record(rec, 0.05)
    assert np.array_equal(rebuilt.lambda_hat, cert.lambda_hat)


def test_nonmaximizer_multipliers_zero():
    prob = analytic_problem("smooth-2con", noise_sigma=0.01)
    cfg = ball_config(eta=0.2, max_iters=120, seed=2)
    result = run(prob, cfg, make_oracle(prob, seed=2))
    cert = result.certificate
    argmax = np.flatnonzero(cert.fhat == cert.fhat.max())
    for i in range(2):
        if i not in argmax:
            assert cert.lambda_hat[i] == 0.0


def test_barrier_descent_noiseless():
    # End-to-end descent of the reference smoothed barrier in theory mode
    # (fixed radius, noiseless measurements, capped sample bound).
    prob = analytic_problem("linear-ball", noise_sigma=0.0)
    cfg = AlgoConfig(
        eta=0.1,
        delta=0.05,
        max_iters=200,
        n_policy="theoretical",
        n_cap=128,
        nu_policy="fixed",
        seed=3,
    )
    result = run(prob, cfg, make_oracle(prob, sigma=0.0, seed=3))
    L = prob.lipschitz
    C = prob.grad_lower**2 / (8.0 * L * L)
    nu = C * cfg.eta / L
    b0, _ = barrier_value_and_grad(prob, prob.safe_start, cfg.eta, nu, 200_000, rng=1)
    bk, _ = barrier_value_and_grad(prob, result.x_final, cfg.eta, nu, 200_000, rng=2)
    assert bk < b0 - 0.1
    assert result.audit.violation_count == 0
