"""ADMM solver for min ||L||_* + lam ||S||_1 subject to L + S = X."""

import logging
from dataclasses import dataclass, field

import numpy as np

from ..algebra.tsvd import prox_tnn, tubal_rank
from ..tensor.models import DenseTensor, as_dense, require_same_shape
from ..tensor.transforms import frobenius_norm, infinity_norm
from .certificate import default_lambda

logger = logging.getLogger(__name__)


@dataclass
class SolverConfig:
    """ADMM parameters. lam=None selects default_lambda for the input shape.

    mu0 and mu_max are penalties for a unit-norm input; solve divides both
    by ||X||_F.
    """
    lam: float | None = None
    mu0: float = 1e-3
    mu_max: float = 1e10
    rho_mu: float = 1.1
    tol: float = 1e-8
    max_iter: int = 1000

    def __post_init__(self):
        if self.lam is not None and self.lam <= 0:
            raise ValueError(f"lam must be positive, got {self.lam}")
        if self.mu0 <= 0:
            raise ValueError(f"mu0 must be positive, got {self.mu0}")
        if self.mu0 > self.mu_max:
            raise ValueError(f"mu0={self.mu0} exceeds mu_max={self.mu_max}")
        if self.rho_mu < 1:
            raise ValueError(f"rho_mu must be at least 1, got {self.rho_mu}")
        if self.tol <= 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be at least 1, got {self.max_iter}")


@dataclass
class TrpcaSolution:
    L: DenseTensor
    S: DenseTensor
    iterations: int
    converged: bool
    lam: float
    primal_residuals: list[float] = field(default_factory=list)
    dual_residuals: list[float] = field(default_factory=list)
    objective_trace: list[float] = field(default_factory=list)


def soft_threshold(t, tau: float) -> DenseTensor:
    """Entrywise sgn(x) * max(|x| - tau, 0).

    Raises:
        ValueError: If tau is negative.
    """
    if tau < 0:
        raise ValueError(f"tau must be non-negative, got {tau}")
    t = as_dense(t)
    return np.sign(t) * np.maximum(np.abs(t) - tau, 0.0)


def solve(x, cfg: SolverConfig | None = None) -> TrpcaSolution:
    """Split x into a low-tubal-rank L and a sparse S by ADMM.

    Iterates
        L <- tsvt(X - S + Y/mu, 1/mu)
        S <- soft_threshold(X - L + Y/mu, lam/mu)
        Y <- Y + mu (X - L - S)
        mu <- min(rho_mu * mu, mu_max)
    with mu starting at cfg.mu0 / ||X||_F and capped at cfg.mu_max / ||X||_F,
    so solving c X returns c times the solution for X. Stops when the
    relative primal residual, the relative change of (L, S) and the dual
    residual mu ||S_k - S_{k-1}||_F / max(1, ||Y||_F) all fall to cfg.tol.

    Returns:
        The solution. If max_iter is reached, converged is False and the
        iterate with the smallest primal residual is returned.
    """
    cfg = cfg or SolverConfig()
    x = as_dense(x, "x")
    lam = default_lambda(x.shape) if cfg.lam is None else cfg.lam
    norm_x = frobenius_norm(x)
    scale = norm_x if norm_x > 0 else 1.0

    l = np.zeros_like(x)
    s = np.zeros_like(x)
    y = np.zeros_like(x)
    mu, mu_max = cfg.mu0 / scale, cfg.mu_max / scale
    solution = TrpcaSolution(L=l, S=s, iterations=0, converged=False, lam=lam)
    best = (np.inf, l, s)

    for iteration in range(1, cfg.max_iter + 1):
        l_new, tnn_l = prox_tnn(x - s + y / mu, 1.0 / mu)
        s_new = soft_threshold(x - l_new + y / mu, lam / mu)
        gap = x - l_new - s_new
        y = y + mu * gap

        residual = frobenius_norm(gap) / scale
        change = max(frobenius_norm(l_new - l), frobenius_norm(s_new - s)) / scale
        dual = mu * frobenius_norm(s_new - s) / max(1.0, frobenius_norm(y))
        solution.primal_residuals.append(residual)
        solution.dual_residuals.append(dual)
        solution.objective_trace.append(tnn_l + lam * float(np.abs(s_new).sum()))
        if residual < best[0]:
            best = (residual, l_new, s_new)
        logger.debug("ADMM iter %d: mu=%.3e primal=%.3e change=%.3e dual=%.3e",
                     iteration, mu, residual, change, dual)

        l, s = l_new, s_new
        mu = min(cfg.rho_mu * mu, mu_max)
        if residual <= cfg.tol and change <= cfg.tol and dual <= cfg.tol:
            solution.L, solution.S = l, s
            solution.iterations = iteration
            solution.converged = True
            logger.info("ADMM converged in %d iterations (primal %.3e, dual %.3e)",
                        iteration, residual, dual)
            return solution

    solution.L, solution.S = best[1], best[2]
    solution.iterations = cfg.max_iter
    logger.warning("ADMM did not converge in %d iterations (best primal %.3e, last dual %.3e)",
                   cfg.max_iter, best[0], solution.dual_residuals[-1])
    return solution


@dataclass
class RecoveryReport:
    l_error: float
    s_error: float
    precision: float
    recall: float
    tubal_rank: int


def _relative_error(estimate: DenseTensor, truth: DenseTensor) -> float:
    denom = frobenius_norm(truth)
    err = frobenius_norm(estimate - truth)
    return err / denom if denom > 0 else err


def recovery_report(sol: TrpcaSolution, l0, s0, support_tol: float = 1e-6) -> RecoveryReport:
    """Compare a solution with the planted (l0, s0).

    The estimated support is the entries of S above support_tol * ||S||_inf;
    the true support is the nonzeros of s0.
    """
    l0 = as_dense(l0, "l0")
    s0 = as_dense(s0, "s0")
    require_same_shape(sol.L, l0)
    require_same_shape(sol.S, s0)

    s_inf = infinity_norm(sol.S)
    estimated = np.abs(sol.S) > support_tol * s_inf if s_inf > 0 else np.zeros(s0.shape, dtype=bool)
    true = s0 != 0
    hits = int(np.count_nonzero(estimated & true))
    n_est = int(np.count_nonzero(estimated))
    n_true = int(np.count_nonzero(true))
    return RecoveryReport(
        l_error=_relative_error(sol.L, l0),
        s_error=_relative_error(sol.S, s0),
        precision=hits / n_est if n_est else 1.0,
        recall=hits / n_true if n_true else 1.0,
        tubal_rank=tubal_rank(sol.L),
    )
