"""Single Monte-Carlo trials, one function per experiment kind.

Each trial receives a TrialTask and returns its measurements as a flat
dict. Trials are top-level functions so a process pool can pickle them.
"""

import logging
import math
from typing import NamedTuple

import numpy as np

from ..algebra.tproduct import tprod, ttranspose
from ..algebra.tsvd import spectral_norm
from ..services.certificate import (
    NeumannDivergenceError,
    construct_certificate,
    default_lambda,
    verify_certificate,
)
from ..services.operator_norm import operator_norm
from ..services.projections import SupportSet, TangentSpace, incoherence_mu, project_omega
from ..services.random_models import (
    rng_for,
    sample_bernoulli_support,
    sample_low_tubal_rank,
    sample_sign_tensor,
    sample_signs,
)
from ..services.solver import SolverConfig, recovery_report, solve
from ..tensor.transforms import frobenius_norm, infinity_norm

logger = logging.getLogger(__name__)


class TrialTask(NamedTuple):
    """One (parameter point, trial) work unit."""
    kind: str
    seed: int
    point_index: int
    trial: int
    n: int
    n3: int
    r: int
    rho: float
    tol: float
    max_iter: int
    success_tol: float
    j0: int | None

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.n, self.n, self.n3)

    def rng(self) -> np.random.Generator:
        return rng_for(self.seed, self.kind, self.point_index, self.trial)


def _mu(t: TangentSpace) -> float:
    return incoherence_mu(t).mu if t.rank else math.nan


def sign_spectral_trial(task: TrialTask) -> dict:
    """||M|| / sqrt(n n3) for a Bernoulli sign tensor M."""
    m = sample_sign_tensor(task.shape, task.rho, task.rng())
    norm = spectral_norm(m)
    return {"spectral_norm": norm, "ratio": norm / math.sqrt(task.n * task.n3)}


def pt_concentration_trial(task: TrialTask) -> dict:
    """||P_T - rho^-1 P_T P_Omega P_T|| by power iteration on its square."""
    rng = task.rng()
    _, t = sample_low_tubal_rank(task.shape, task.r, rng)
    omega = sample_bernoulli_support(task.shape, task.rho, rng)

    def deviation(z):
        pz = t.project(z)
        return pz - t.project(project_omega(pz, omega)) / task.rho

    estimate = operator_norm(lambda z: deviation(deviation(z)), task.shape,
                             tol=task.tol, max_iter=task.max_iter, seed=task.trial)
    return {"epsilon": estimate.value, "mu": _mu(t),
            "iterations": estimate.iterations, "converged": estimate.converged}


def pt_omega_norm_trial(task: TrialTask) -> dict:
    """||P_Omega P_T||^2 = lambda_max(P_T P_Omega P_T), minus rho."""
    rng = task.rng()
    _, t = sample_low_tubal_rank(task.shape, task.r, rng)
    omega = sample_bernoulli_support(task.shape, task.rho, rng)
    estimate = operator_norm(lambda z: t.project(project_omega(t.project(z), omega)), task.shape,
                             tol=task.tol, max_iter=task.max_iter, seed=task.trial)
    return {"norm_sq": estimate.eigenvalue, "excess": estimate.eigenvalue - task.rho,
            "iterations": estimate.iterations, "converged": estimate.converged}


def infty_contraction_trial(task: TrialTask) -> dict:
    """||Z - rho^-1 P_T P_Omega Z||_inf / ||Z||_inf for a fresh Z in T."""
    rng = task.rng()
    _, t = sample_low_tubal_rank(task.shape, task.r, rng)
    y = rng.standard_normal((task.n, task.r, task.n3))
    w = rng.standard_normal((task.n, task.r, task.n3))
    z = tprod(t.U, ttranspose(y)) + tprod(w, ttranspose(t.V))
    omega = sample_bernoulli_support(task.shape, task.rho, rng)
    residual = z - t.project(project_omega(z, omega)) / task.rho
    return {"ratio": infinity_norm(residual) / infinity_norm(z)}


def spectral_deviation(z, omega: SupportSet, rho: float) -> float:
    """||(I - rho^-1 P_Omega) z||."""
    return spectral_norm(z - project_omega(z, omega) / rho)


def spectral_deviation_trial(task: TrialTask) -> dict:
    """||(I - rho^-1 P_Omega) Z|| for a Z fixed per point with ||Z||_inf = 1."""
    z = rng_for(task.seed, "dev-z", task.point_index).uniform(-1.0, 1.0, task.shape)
    z /= infinity_norm(z)
    omega = sample_bernoulli_support(task.shape, task.rho, task.rng())
    deviation = spectral_deviation(z, omega, task.rho)
    size = task.n * task.n3
    scale = math.sqrt(size * math.log(size) / task.rho) if size > 1 else math.nan
    return {"deviation": deviation, "c0_sqrt": deviation / scale}


_CERTIFICATE_FAILURE = {
    "spectral_WL": math.nan, "spectral_WS": math.nan, "spectral_sum": math.nan,
    "tangent_residual": math.nan, "omega_residual_F": math.nan, "omega_comp_infty": math.nan,
    "support_residual": math.nan, "golfing_ratio": math.nan, "neumann_terms": 0,
    "lemma32_a": False, "lemma32_b": False, "lemma32_c": False,
    "lemma33_a": False, "lemma33_b": False,
}


def certificate_trial(task: TrialTask) -> dict:
    """Build and verify a dual certificate on a planted instance."""
    rng = task.rng()
    _, t = sample_low_tubal_rank(task.shape, task.r, rng)
    omega = sample_bernoulli_support(task.shape, task.rho, rng)
    signs = sample_signs(omega, rng)
    lam = default_lambda(task.shape)
    try:
        cert = construct_certificate(t, omega, signs, lam=lam, seed=rng, j0=task.j0, rho=task.rho)
    except NeumannDivergenceError as e:
        logger.info("Trial %d at point %d: %s", task.trial, task.point_index, e)
        return {**_CERTIFICATE_FAILURE, "passed": False, "diverged": True}

    report = verify_certificate(cert.w_l, cert.w_s, t, omega, signs, lam)
    sign_norm = frobenius_norm(signs)
    support_residual = (frobenius_norm(project_omega(cert.w_s, omega) - lam * signs) / (lam * sign_norm)
                        if sign_norm > 0 else 0.0)
    norms = np.asarray(cert.golfing_frobenius)
    previous = norms[:-1]
    ratios = norms[1:][previous > 0] / previous[previous > 0]
    return {
        "spectral_WL": report.spectral_WL,
        "spectral_WS": report.spectral_WS,
        "spectral_sum": report.spectral_sum,
        "tangent_residual": report.tangent_residual,
        "omega_residual_F": report.omega_residual_F,
        "omega_comp_infty": report.omega_comp_infty,
        "support_residual": support_residual,
        "golfing_ratio": float(np.median(ratios)) if ratios.size else math.nan,
        "neumann_terms": cert.neumann_terms,
        "lemma32_a": report.lemma32_checks[0],
        "lemma32_b": report.lemma32_checks[1],
        "lemma32_c": report.lemma32_checks[2],
        "lemma33_a": report.lemma33_checks[0],
        "lemma33_b": report.lemma33_checks[1],
        "passed": report.passed,
        "diverged": False,
    }


def phase_trial(task: TrialTask) -> dict:
    """Plant L0 + S0, solve with the default lambda and score the recovery."""
    rng = task.rng()
    l0, _ = sample_low_tubal_rank(task.shape, task.r, rng)
    omega = sample_bernoulli_support(task.shape, task.rho, rng)
    s0 = sample_signs(omega, rng)
    sol = solve(l0 + s0, SolverConfig(tol=task.tol, max_iter=task.max_iter))
    report = recovery_report(sol, l0, s0)
    return {
        "l_error": report.l_error,
        "s_error": report.s_error,
        "precision": report.precision,
        "recall": report.recall,
        "tubal_rank_L": report.tubal_rank,
        "iterations": sol.iterations,
        "converged": sol.converged,
        "success": bool(sol.converged and report.l_error < task.success_tol),
    }


TRIAL_FUNCTIONS = {
    "sign": sign_spectral_trial,
    "pt": pt_concentration_trial,
    "ptomega": pt_omega_norm_trial,
    "infty": infty_contraction_trial,
    "dev": spectral_deviation_trial,
    "certify": certificate_trial,
    "phase": phase_trial,
}

# Measurement columns per kind, in CSV order.
MEASUREMENTS = {
    "sign": ["spectral_norm", "ratio"],
    "pt": ["epsilon", "mu", "iterations", "converged"],
    "ptomega": ["norm_sq", "excess", "iterations", "converged"],
    "infty": ["ratio"],
    "dev": ["deviation", "c0_sqrt"],
    "certify": [*_CERTIFICATE_FAILURE.keys(), "passed", "diverged"],
    "phase": ["l_error", "s_error", "precision", "recall", "tubal_rank_L",
              "iterations", "converged", "success"],
}
