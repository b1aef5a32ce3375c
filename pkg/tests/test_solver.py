"""Tests for the ADMM solver and recovery scoring."""

import numpy as np
import pytest

from trpcalab.algebra.tsvd import tsvt
from trpcalab.services.certificate import default_lambda
from trpcalab.services.random_models import rng_for, sample_bernoulli_support, sample_low_tubal_rank, sample_signs
from trpcalab.services.solver import (
    SolverConfig,
    TrpcaSolution,
    recovery_report,
    soft_threshold,
    solve,
)
from trpcalab.tensor.transforms import frobenius_norm, infinity_norm


def test_soft_threshold():
    t = np.array([[[3.0, -0.5, 0.2, -2.0]]])
    np.testing.assert_allclose(soft_threshold(t, 1.0), [[[2.0, 0.0, 0.0, -1.0]]])
    np.testing.assert_array_equal(soft_threshold(t, 0.0), t)
    with pytest.raises(ValueError):
        soft_threshold(t, -1.0)


def test_soft_threshold_is_entrywise_prox(rng):
    t = rng.standard_normal((3, 3, 2))
    tau = 0.4
    x = soft_threshold(t, tau)
    residual = t - x
    nonzero = x != 0
    np.testing.assert_allclose(residual[nonzero], tau * np.sign(x[nonzero]))
    assert np.all(np.abs(residual[~nonzero]) <= tau)


@pytest.mark.parametrize("kwargs", [
    {"lam": 0.0},
    {"mu0": -1.0},
    {"mu0": 1e11},
    {"rho_mu": 0.9},
    {"tol": 0.0},
    {"max_iter": 0},
])
def test_solver_config_validation(kwargs):
    with pytest.raises(ValueError):
        SolverConfig(**kwargs)


def test_zero_input_converges_immediately():
    sol = solve(np.zeros((3, 3, 2)))
    assert sol.converged
    assert sol.iterations == 1
    np.testing.assert_array_equal(sol.L, 0.0)
    np.testing.assert_array_equal(sol.S, 0.0)
    assert sol.lam == pytest.approx(default_lambda((3, 3, 2)))


def test_first_iteration_composes_proxes(rng):
    x = rng.standard_normal((3, 3, 2))
    lam = 0.3
    # mu0 = ||x||_F gives an effective first penalty of 1.
    sol = solve(x, SolverConfig(lam=lam, mu0=frobenius_norm(x), max_iter=1))
    expected_l = tsvt(x, 1.0)
    expected_s = soft_threshold(x - expected_l, lam)
    assert not sol.converged
    assert sol.iterations == 1
    np.testing.assert_allclose(sol.L, expected_l, atol=1e-10)
    np.testing.assert_allclose(sol.S, expected_s, atol=1e-10)
    assert len(sol.primal_residuals) == len(sol.dual_residuals) == len(sol.objective_trace) == 1


def test_solution_traces_track_iterations(rng):
    x = rng.standard_normal((4, 4, 2))
    sol = solve(x, SolverConfig(max_iter=30))
    assert len(sol.primal_residuals) == sol.iterations <= 30
    assert len(sol.objective_trace) == len(sol.primal_residuals)



def _planted(shape, r, rho, seed, tag="planted-recovery"):
    rng = rng_for(seed, tag)
    l0, _ = sample_low_tubal_rank(shape, r, rng)
    s0 = sample_signs(sample_bernoulli_support(shape, rho, rng), rng)
    return l0, s0


@pytest.mark.parametrize("c", [3.0, 1e-3])
def test_solution_scales_with_input(c):
    l0, s0 = _planted((12, 12, 4), 2, 0.1, seed=0)
    x = l0 + s0
    cfg = SolverConfig(lam=0.1, max_iter=150)
    base = solve(x, cfg)
    scaled = solve(c * x, cfg)
    assert scaled.iterations == base.iterations
    assert scaled.converged == base.converged
    assert frobenius_norm(scaled.L - c * base.L) <= 1e-8 * frobenius_norm(c * base.L)
    assert frobenius_norm(scaled.S - c * base.S) <= 1e-8 * frobenius_norm(c * base.S)


def test_stalled_penalty_is_not_reported_converged():
    l0, s0 = _planted((12, 12, 4), 2, 0.1, seed=0)
    cfg = SolverConfig(lam=0.1, rho_mu=2.0, max_iter=200)
    sol = solve(l0 + s0, cfg)
    assert not sol.converged
    assert sol.iterations == 200
    assert sol.dual_residuals[-1] > cfg.tol


def test_uncorrupted_low_rank_input_has_empty_sparse_part():
    l0, _ = sample_low_tubal_rank((60, 60, 4), 2, rng_for(1, "uncorrupted"))
    sol = solve(l0)
    assert sol.converged
    assert infinity_norm(sol.S) < 1e-6
    assert frobenius_norm(sol.L - l0) < 1e-6 * frobenius_norm(l0)


def test_recovery_report_exact_match(rng):
    l0, _ = sample_low_tubal_rank((5, 5, 2), 1, rng)
    s0 = np.zeros_like(l0)
    s0[0, 1, 0] = 2.0
    sol = TrpcaSolution(L=l0.copy(), S=s0.copy(), iterations=1, converged=True, lam=0.1)
    report = recovery_report(sol, l0, s0)
    assert report.l_error == 0.0
    assert report.s_error == 0.0
    assert report.precision == 1.0
    assert report.recall == 1.0
    assert report.tubal_rank == 1


def test_recovery_report_empty_supports():
    zeros = np.zeros((2, 2, 2))
    sol = TrpcaSolution(L=zeros, S=zeros, iterations=1, converged=True, lam=0.1)
    report = recovery_report(sol, zeros, zeros)
    assert (report.precision, report.recall) == (1.0, 1.0)
    assert report.l_error == 0.0


def test_recovery_report_counts_support_hits():
    zeros = np.zeros((2, 2, 1))
    s0 = zeros.copy()
    s0[0, 0, 0] = 1.0
    s0[1, 1, 0] = 1.0
    s_hat = zeros.copy()
    s_hat[0, 0, 0] = 1.0
    s_hat[0, 1, 0] = 1.0
    s_hat[1, 0, 0] = 1.0
    sol = TrpcaSolution(L=zeros, S=s_hat, iterations=1, converged=True, lam=0.1)
    report = recovery_report(sol, zeros, s0)
    assert report.precision == pytest.approx(1 / 3)
    assert report.recall == pytest.approx(1 / 2)


@pytest.mark.slow
def test_planted_recovery_at_desk_scale():
    shape = (40, 40, 10)
    recovered = 0
    for seed in range(10):
        l0, s0 = _planted(shape, 3, 0.1, seed)
        sol = solve(l0 + s0)
        report = recovery_report(sol, l0, s0)
        recovered += report.l_error < 1e-5
    assert recovered >= 9


@pytest.mark.slow
def test_primal_residual_mostly_non_increasing():
    steps = []
    for seed in range(5):
        l0, s0 = _planted((20, 20, 4), 1, 0.05, seed)
        sol = solve(l0 + s0)
        steps.extend(np.diff(sol.primal_residuals) <= 1e-12)
    assert np.mean(steps) >= 0.95
