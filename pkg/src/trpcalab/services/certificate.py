"""Dual certificate construction and verification.

The certificate is W = W_L + W_S. W_L comes from the golfing iteration

    Y_j = Y_{j-1} + q^-1 P_{Omega_j}(U*V^* - P_T Y_{j-1}),   W_L = P_T-perp(Y_j0)

over a partition of the complement of Omega, and W_S from the least-squares
correction

    W_S = lam * P_T-perp sum_k (P_Omega P_T P_Omega)^k sgn(S0).

W certifies (L0, S0) when it lies in T-perp, has spectral norm below 1/2,
matches lam * sgn(S0) on Omega to within lam / 4 in Frobenius norm and stays
below lam / 2 entrywise off Omega.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ..algebra.tsvd import spectral_norm
from ..errors import TrpcaLabError
from ..tensor.models import DenseTensor, Shape3, as_dense, require_same_shape
from ..tensor.transforms import frobenius_norm, infinity_norm
from .projections import (
    SupportSet,
    TangentSpace,
    project_omega,
    project_omega_complement,
    project_t,
    project_t_complement,
)
from .random_models import (
    GolfingConfig,
    GolfingConfigError,
    SeedLike,
    default_j0,
    partition_complement,
)

logger = logging.getLogger(__name__)

NEUMANN_TOL = 1e-10
NEUMANN_MAX_TERMS = 200
# Consecutive non-decreasing term norms that count as divergence.
DIVERGENCE_WINDOW = 5


class NeumannDivergenceError(TrpcaLabError):
    """Raised when the Neumann series terms stop shrinking.

    This signals ||P_Omega P_T|| >= 1, so P_Omega - P_Omega P_T P_Omega is
    not invertible on Omega.
    """

    def __init__(self, term_norms: list[float]):
        super().__init__(
            "Neumann series diverges: term norms "
            + ", ".join(f"{v:.3e}" for v in term_norms)
        )
        self.term_norms = term_norms


class InfeasiblePairError(TrpcaLabError, ValueError):
    """Raised when L + S does not reproduce the observed tensor."""
    pass


def default_lambda(shape) -> float:
    """lam = 1 / sqrt(n(1) * n3)."""
    shape = Shape3.of(shape)
    return 1.0 / math.sqrt(shape.n_max * shape.n3)


class GolfingResult(NamedTuple):
    """W_L with the golfing iterate and the residual trace.

    frobenius[j] and infinity[j] are the norms of Z_j = U*V^* - P_T(Y_j),
    starting at Z_0 = U*V^*.
    """
    w_l: DenseTensor
    y: DenseTensor
    frobenius: list[float]
    infinity: list[float]


class NeumannResult(NamedTuple):
    solution: DenseTensor
    terms: int
    converged: bool


def golfing_wl(t: TangentSpace, partition: list[SupportSet], q: float) -> GolfingResult:
    """Run the golfing iteration over the given rounds.

    Raises:
        GolfingConfigError: If the partition is empty or q is not in (0, 1].
    """
    if not partition:
        raise GolfingConfigError("Golfing needs at least one round")
    if not 0.0 < q <= 1.0:
        raise GolfingConfigError(f"q must lie in (0, 1], got {q}")

    uv = t.uv()
    y = np.zeros(t.shape)
    z = uv
    frobenius = [frobenius_norm(z)]
    infinity = [infinity_norm(z)]
    for j, omega_j in enumerate(partition, start=1):
        y = y + project_omega(z, omega_j) / q
        z = uv - project_t(y, t)
        frobenius.append(frobenius_norm(z))
        infinity.append(infinity_norm(z))
        logger.debug("Golfing round %d: |Z|_F=%.6e |Z|_inf=%.6e", j, frobenius[-1], infinity[-1])
    return GolfingResult(project_t_complement(y, t), y, frobenius, infinity)


def neumann_apply(omega: SupportSet, t: TangentSpace, rhs, tol: float = NEUMANN_TOL,
                  max_terms: int = NEUMANN_MAX_TERMS) -> NeumannResult:
    """Sum (P_Omega P_T P_Omega)^k P_Omega(rhs) over k >= 0.

    The result X solves (P_Omega - P_Omega P_T P_Omega)(X) = P_Omega(rhs).

    Args:
        omega: Support Omega.
        t: Tangent space T.
        rhs: Right-hand side tensor.
        tol: Stop once a term's Frobenius norm is at most tol * ||rhs||_F.
        max_terms: Term cap; hitting it returns converged=False.

    Raises:
        NeumannDivergenceError: If DIVERGENCE_WINDOW consecutive term norms
            are non-decreasing.
    """
    rhs = as_dense(rhs, "rhs")
    threshold = tol * frobenius_norm(rhs)
    term = project_omega(rhs, omega)
    solution = np.zeros_like(rhs)
    norms: list[float] = []

    for k in range(max_terms):
        norm = frobenius_norm(term)
        norms.append(norm)
        if norm <= threshold:
            logger.debug("Neumann series converged after %d terms", k)
            return NeumannResult(solution, k, True)
        window = norms[-DIVERGENCE_WINDOW:]
        if len(window) == DIVERGENCE_WINDOW and all(a <= b for a, b in zip(window, window[1:])):
            raise NeumannDivergenceError(window)
        solution += term
        term = project_omega(project_t(term, t), omega)

    logger.warning("Neumann series not converged after %d terms (last term %.3e)",
                   max_terms, norms[-1])
    return NeumannResult(solution, max_terms, False)


def _check_sign_support(sign_tensor: DenseTensor, omega: SupportSet) -> None:
    if np.any(project_omega_complement(sign_tensor, omega)):
        raise ValueError("Sign tensor has entries outside Omega")


def _build_ws(omega: SupportSet, t: TangentSpace, sign_tensor, lam: float,
              tol: float, max_terms: int) -> tuple[DenseTensor, NeumannResult]:
    sign_tensor = as_dense(sign_tensor, "sign_tensor")
    _check_sign_support(sign_tensor, omega)
    series = neumann_apply(omega, t, sign_tensor, tol=tol, max_terms=max_terms)
    return lam * project_t_complement(series.solution, t), series


def build_ws(omega: SupportSet, t: TangentSpace, sign_tensor, lam: float,
             tol: float = NEUMANN_TOL, max_terms: int = NEUMANN_MAX_TERMS) -> DenseTensor:
    """W_S = lam * P_T-perp (P_Omega - P_Omega P_T P_Omega)^-1 sgn(S0).

    Raises:
        ValueError: If sign_tensor is nonzero outside omega.
        NeumannDivergenceError: If the series diverges.
    """
    return _build_ws(omega, t, sign_tensor, lam, tol, max_terms)[0]


@dataclass
class DualCertificate:
    """W_L and W_S with the diagnostics of their construction."""
    w_l: DenseTensor
    w_s: DenseTensor
    golfing_frobenius: list[float]
    golfing_infinity: list[float]
    neumann_terms: int
    config: GolfingConfig

    @property
    def w(self) -> DenseTensor:
        return self.w_l + self.w_s


def construct_certificate(t: TangentSpace, omega: SupportSet, sign_tensor, lam: float | None = None,
                          seed: SeedLike = 0, j0: int | None = None, rho: float | None = None,
                          tol: float = NEUMANN_TOL,
                          max_terms: int = NEUMANN_MAX_TERMS) -> DualCertificate:
    """Partition the complement of omega, run golfing and build W_S.

    Args:
        t: Tangent space of L0.
        omega: Support of S0.
        sign_tensor: sgn(S0), supported on omega.
        lam: Regularizer; defaults to default_lambda.
        seed: Seed of the partition.
        j0: Golfing rounds; defaults to 2 * ceil(ln(n(1) * n3)).
        rho: Model density of omega; defaults to its empirical density.
    """
    lam = default_lambda(t.shape) if lam is None else lam
    j0 = default_j0(t.shape) if j0 is None else j0
    config = GolfingConfig.from_rho(omega.density if rho is None else rho, j0)
    partition = partition_complement(omega, j0, seed, rho=config.rho)
    golf = golfing_wl(t, partition, config.q)
    w_s, series = _build_ws(omega, t, sign_tensor, lam, tol, max_terms)
    logger.debug("Certificate built: j0=%d q=%.6g, %d Neumann terms", j0, config.q, series.terms)
    return DualCertificate(
        w_l=golf.w_l,
        w_s=w_s,
        golfing_frobenius=golf.frobenius,
        golfing_infinity=golf.infinity,
        neumann_terms=series.terms,
        config=config,
    )


@dataclass
class CertificateReport:
    """Numerical evaluation of the certificate conditions.

    conditions holds (W in T-perp, ||W|| < 1/2,
    ||P_Omega(UV^* + W - lam sgn)||_F <= lam/4, ||P_Omega-perp(UV^* + W)||_inf < lam/2).
    """
    spectral_WL: float
    spectral_WS: float
    spectral_sum: float
    tangent_residual: float
    omega_residual_F: float
    omega_comp_infty: float
    lemma32_checks: tuple[bool, bool, bool]
    lemma33_checks: tuple[bool, bool]
    conditions: tuple[bool, bool, bool, bool]
    lambda_below_bound: bool
    passed: bool = field(init=False)

    def __post_init__(self):
        self.passed = all(self.conditions)


def lambda_below_bound(lam: float, shape) -> bool:
    """Whether lam < 1 / sqrt(n3), the optimality hypothesis on lam."""
    return lam < 1.0 / math.sqrt(Shape3.of(shape).n3)


def verify_certificate(w_l, w_s, t: TangentSpace, omega: SupportSet, sign_tensor,
                       lam: float, tangent_tol: float = 1e-6) -> CertificateReport:
    """Evaluate the certificate conditions and the W_L / W_S lemma bounds.

    Args:
        w_l: Golfing part W_L.
        w_s: Least-squares part W_S.
        t: Tangent space of L0.
        omega: Support of S0.
        sign_tensor: sgn(S0).
        lam: Regularizer.
        tangent_tol: W counts as in T-perp when ||P_T W||_F <= tangent_tol * max(1, ||W||_F).
    """
    w_l = as_dense(w_l, "w_l")
    w_s = as_dense(w_s, "w_s")
    sign_tensor = as_dense(sign_tensor, "sign_tensor")
    require_same_shape(w_l, w_s)
    w = w_l + w_s
    uv = t.uv()

    spectral_wl = spectral_norm(w_l)
    spectral_ws = spectral_norm(w_s)
    spectral_sum = spectral_norm(w)
    tangent_residual = frobenius_norm(project_t(w, t))
    omega_residual = frobenius_norm(project_omega(uv + w - lam * sign_tensor, omega))
    omega_comp = infinity_norm(project_omega_complement(uv + w, omega))

    lemma32 = (
        spectral_wl < 0.25,
        frobenius_norm(project_omega(uv + w_l, omega)) < lam / 4,
        infinity_norm(project_omega_complement(uv + w_l, omega)) < lam / 4,
    )
    lemma33 = (
        spectral_ws < 0.25,
        infinity_norm(project_omega_complement(w_s, omega)) < lam / 4,
    )
    conditions = (
        tangent_residual <= tangent_tol * max(1.0, frobenius_norm(w)),
        spectral_sum < 0.5,
        omega_residual <= lam / 4,
        omega_comp < lam / 2,
    )
    report = CertificateReport(
        spectral_WL=spectral_wl,
        spectral_WS=spectral_ws,
        spectral_sum=spectral_sum,
        tangent_residual=tangent_residual,
        omega_residual_F=omega_residual,
        omega_comp_infty=omega_comp,
        lemma32_checks=lemma32,
        lemma33_checks=lemma33,
        conditions=conditions,
        lambda_below_bound=lambda_below_bound(lam, t.shape),
    )
    if not report.lambda_below_bound:
        logger.warning("lam=%.6g is not below 1/sqrt(n3); the optimality lemma does not apply", lam)
    return report


@dataclass
class OptimalityReport:
    """Residuals of U*V^* + W = lam (sgn(S) + F + P_Omega D) for a candidate pair."""
    w: DenseTensor
    f: DenseTensor
    d: DenseTensor
    w_spectral: float
    f_infty: float
    d_frobenius: float
    neumann_converged: bool
    lambda_below_bound: bool
    passed: bool = field(init=False)

    def __post_init__(self):
        self.passed = (self.w_spectral <= 0.5 and self.f_infty <= 0.5
                       and self.d_frobenius <= 0.25 and self.neumann_converged)


def check_optimality(x, l_hat, s_hat, lam: float | None = None, t: TangentSpace | None = None,
                     omega: SupportSet | None = None,
                     feasibility_tol: float = 1e-8) -> OptimalityReport:
    """Test whether (l_hat, s_hat) satisfies the dual optimality conditions.

    W is the element of T-perp whose restriction to Omega makes
    P_Omega(U*V^* + W) = lam * sgn(s_hat), found with the Neumann series.
    Then G = U*V^* + W, F = P_Omega-perp(G) / lam and D = P_Omega(G / lam - sgn).

    Args:
        x: Observed tensor.
        l_hat: Low-rank estimate.
        s_hat: Sparse estimate.
        lam: Regularizer; defaults to default_lambda.
        t: Tangent space; defaults to the one at l_hat.
        omega: Support; defaults to the nonzeros of s_hat.
        feasibility_tol: Relative tolerance on ||l_hat + s_hat - x||_F.

    Raises:
        InfeasiblePairError: If l_hat + s_hat does not reproduce x.
    """
    x = as_dense(x, "x")
    l_hat = as_dense(l_hat, "l_hat")
    s_hat = as_dense(s_hat, "s_hat")
    require_same_shape(x, l_hat)
    require_same_shape(x, s_hat)
    gap = frobenius_norm(l_hat + s_hat - x)
    if gap > feasibility_tol * max(1.0, frobenius_norm(x)):
        raise InfeasiblePairError(f"||L + S - X||_F = {gap:.3e} exceeds the feasibility tolerance")

    lam = default_lambda(x.shape) if lam is None else lam
    t = TangentSpace.from_tensor(l_hat) if t is None else t
    omega = SupportSet(s_hat != 0) if omega is None else omega
    sign = project_omega(np.sign(s_hat), omega)
    uv = t.uv()

    try:
        series = neumann_apply(omega, t, lam * sign - project_omega(uv, omega))
        w = project_t_complement(series.solution, t)
        converged = series.converged
    except NeumannDivergenceError:
        logger.warning("Neumann series diverged; P_Omega P_T has norm >= 1 at this candidate")
        w = np.zeros(x.shape)
        converged = False

    g = uv + w
    f = project_omega_complement(g, omega) / lam
    d = project_omega(g / lam - sign, omega)
    return OptimalityReport(
        w=w,
        f=f,
        d=d,
        w_spectral=spectral_norm(w),
        f_infty=infinity_norm(f),
        d_frobenius=frobenius_norm(d),
        neumann_converged=converged,
        lambda_below_bound=lambda_below_bound(lam, x.shape),
    )
