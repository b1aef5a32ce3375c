"""t-SVD, tensor ranks and norms, and the TNN proximal operator.

All quantities come from slicewise SVDs of the Fourier slices. The tensor
nuclear norm carries the 1/n3 factor, ||A||_* = (1/n3) sum_k ||A_bar_k||_*,
so the proximal operator of tau * ||.||_* shrinks every Fourier-slice
singular value by tau.
"""

import logging
from fractions import Fraction
from typing import NamedTuple

import numpy as np
import scipy.linalg as sp_linalg

from ..errors import TrpcaLabError
from ..settings import get_settings
from ..tensor.models import DenseTensor, as_dense
from ..tensor.transforms import inner_product
from .tproduct import from_half_spectrum, half_spectrum, slice_weights

logger = logging.getLogger(__name__)


class SvdConvergenceError(TrpcaLabError):
    """Raised when the SVD of a Fourier slice does not converge."""

    def __init__(self, slice_index: int):
        super().__init__(f"SVD did not converge on Fourier slice {slice_index}")
        self.slice_index = slice_index


class TSvdFactors(NamedTuple):
    """Factors of A = U * S * V^*."""
    U: DenseTensor
    S: DenseTensor
    V: DenseTensor
    tubal_rank: int


class Subgradient(NamedTuple):
    """An element G = U * V^* + W of the TNN subdifferential."""
    G: DenseTensor
    W: DenseTensor
    U: DenseTensor
    V: DenseTensor


def _slice_svd(m: np.ndarray, k: int, full: bool = False, compute_uv: bool = True):
    """SVD of one Fourier slice, retrying with the slower LAPACK driver."""
    try:
        return sp_linalg.svd(m, full_matrices=full, compute_uv=compute_uv,
                             lapack_driver="gesdd")
    except (np.linalg.LinAlgError, ValueError):
        logger.debug("gesdd failed on slice %d, retrying with gesvd", k)
    try:
        return sp_linalg.svd(m, full_matrices=full, compute_uv=compute_uv,
                             lapack_driver="gesvd")
    except (np.linalg.LinAlgError, ValueError) as e:
        raise SvdConvergenceError(k) from e


def _real_slices(n3: int) -> set[int]:
    """Half-spectrum slices that are real for a real tensor."""
    return {0, n3 // 2} if n3 % 2 == 0 else {0}


def _slice(a_half: np.ndarray, k: int, n3: int) -> np.ndarray:
    m = a_half[:, :, k]
    return m.real.copy() if k in _real_slices(n3) else m


def _canonicalize(u: np.ndarray, vh: np.ndarray) -> None:
    """Make the largest-magnitude entry of every left singular vector real-positive.

    Works in place; the matching right singular vectors are rotated so
    that u @ diag(s) @ vh is unchanged.
    """
    p = min(u.shape[1], vh.shape[0])
    for c in range(u.shape[1]):
        pivot = u[np.argmax(np.abs(u[:, c])), c]
        if pivot == 0:
            continue
        phase = pivot / abs(pivot)
        u[:, c] *= np.conj(phase)
        if c < p:
            vh[c, :] *= phase


def rank_threshold(shape, sigma_max: float) -> float:
    """Absolute cutoff below which a singular value counts as zero."""
    n1, n2, n3 = shape
    return get_settings().rank_tol_factor * max(n1, n2, n3) * sigma_max


def fourier_singular_values(a) -> np.ndarray:
    """Singular values of every Fourier slice.

    Args:
        a: n1 x n2 x n3 tensor.

    Returns:
        Array of shape (n3, min(n1, n2)); row k holds the nonincreasing
        singular values of the k-th Fourier slice.

    Raises:
        SvdConvergenceError: If a slice SVD fails.
    """
    a = as_dense(a)
    n1, n2, n3 = a.shape
    a_half = half_spectrum(a)
    half = np.array([
        _slice_svd(_slice(a_half, k, n3), k, compute_uv=False)
        for k in range(n3 // 2 + 1)
    ]).reshape(n3 // 2 + 1, min(n1, n2))
    full = np.empty((n3, min(n1, n2)))
    full[: n3 // 2 + 1] = half
    for k in range(n3 // 2 + 1, n3):
        full[k] = half[n3 - k]
    return full


def _slice_ranks(sigma: np.ndarray, shape) -> np.ndarray:
    sigma_max = float(sigma.max()) if sigma.size else 0.0
    if sigma_max == 0.0:
        return np.zeros(sigma.shape[0], dtype=int)
    cutoff = rank_threshold(shape, sigma_max)
    return np.count_nonzero(sigma > cutoff, axis=1)


def tubal_rank(a) -> int:
    """Number of nonzero singular tubes (the largest slicewise rank)."""
    a = as_dense(a)
    ranks = _slice_ranks(fourier_singular_values(a), a.shape)
    return int(ranks.max()) if ranks.size else 0


def average_rank(a) -> Fraction:
    """Tensor average rank (1/n3) * sum_k rank(A_bar_k) = (1/n3) rank(bcirc(A))."""
    a = as_dense(a)
    ranks = _slice_ranks(fourier_singular_values(a), a.shape)
    return Fraction(int(ranks.sum()), a.shape[2])


def tnn(a) -> float:
    """Tensor nuclear norm (1/n3) * sum of all Fourier-slice singular values."""
    a = as_dense(a)
    return float(fourier_singular_values(a).sum()) / a.shape[2]


def spectral_norm(a) -> float:
    """Tensor spectral norm, the largest Fourier-slice singular value."""
    sigma = fourier_singular_values(a)
    return float(sigma.max()) if sigma.size else 0.0


def average_rank_conjugate(b) -> float:
    """Conjugate of the average rank on the unit spectral-norm ball.

    Equals (1/n3) * sum over all Fourier-slice singular values of
    (sigma - 1)_+, which vanishes whenever ||B|| <= 1.
    """
    b = as_dense(b)
    sigma = fourier_singular_values(b)
    return float(np.maximum(sigma - 1.0, 0.0).sum()) / b.shape[2]


def tsvd(a, mode: str = "skinny") -> TSvdFactors:
    """t-SVD A = U * S * V^*.

    Each Fourier slice is factored independently. Slices above n3 // 2 are
    the conjugates of their partners, so the factors are real. Left singular
    vectors are phase-normalized so their largest-magnitude entry is
    real-positive.

    Args:
        a: n1 x n2 x n3 tensor.
        mode: "skinny" keeps r = tubal_rank singular tubes (U: n1 x r x n3,
            S: r x r x n3, V: n2 x r x n3); "full" keeps everything
            (U: n1 x n1 x n3, S: n1 x n2 x n3, V: n2 x n2 x n3).

    Returns:
        The TSvdFactors.

    Raises:
        ValueError: If mode is unknown.
        SvdConvergenceError: If a slice SVD fails.
    """
    if mode not in ("skinny", "full"):
        raise ValueError(f"Unknown t-SVD mode '{mode}'")
    a = as_dense(a)
    n1, n2, n3 = a.shape
    full = mode == "full"
    a_half = half_spectrum(a)
    n_half = n3 // 2 + 1

    us, ss, vhs = [], [], []
    for k in range(n_half):
        u, s, vh = _slice_svd(_slice(a_half, k, n3), k, full=full)
        u = u.astype(np.complex128)
        vh = vh.astype(np.complex128)
        _canonicalize(u, vh)
        us.append(u)
        ss.append(s)
        vhs.append(vh)

    ranks = _slice_ranks(np.array(ss).reshape(n_half, min(n1, n2)), a.shape)
    r = int(ranks.max()) if ranks.size else 0
    if r == 0 and not full:
        return TSvdFactors(U=np.zeros((n1, 0, n3)), S=np.zeros((0, 0, n3)),
                           V=np.zeros((n2, 0, n3)), tubal_rank=0)

    if full:
        u_half = np.stack(us, axis=2)
        v_half = np.stack([vh.conj().T for vh in vhs], axis=2)
        s_half = np.zeros((n1, n2, n_half), dtype=np.complex128)
        p = min(n1, n2)
        for k in range(n_half):
            s_half[np.arange(p), np.arange(p), k] = ss[k]
    else:
        u_half = np.stack([u[:, :r] for u in us], axis=2)
        v_half = np.stack([vh[:r, :].conj().T for vh in vhs], axis=2)
        s_half = np.zeros((r, r, n_half), dtype=np.complex128)
        for k in range(n_half):
            s_half[np.arange(r), np.arange(r), k] = ss[k][:r]

    return TSvdFactors(
        U=from_half_spectrum(u_half, n3),
        S=from_half_spectrum(s_half, n3),
        V=from_half_spectrum(v_half, n3),
        tubal_rank=r,
    )


def prox_tnn(a, tau: float) -> tuple[DenseTensor, float]:
    """Proximal operator of tau * ||.||_* together with the TNN of the result.

    Args:
        a: n1 x n2 x n3 tensor.
        tau: Threshold, tau >= 0.

    Returns:
        Tuple of (X, ||X||_*) with X = argmin tau ||X||_* + 1/2 ||X - a||_F^2.

    Raises:
        ValueError: If tau is negative.
    """
    if tau < 0:
        raise ValueError(f"tau must be >= 0, got {tau}")
    a = as_dense(a)
    n3 = a.shape[2]
    if tau == 0:
        return a.copy(), tnn(a)

    a_half = half_spectrum(a)
    x_half = np.zeros_like(a_half)
    weights = slice_weights(n3)
    total = 0.0
    for k in range(n3 // 2 + 1):
        u, s, vh = _slice_svd(_slice(a_half, k, n3), k)
        s = np.maximum(s - tau, 0.0)
        keep = np.count_nonzero(s)
        if keep:
            x_half[:, :, k] = (u[:, :keep] * s[:keep]) @ vh[:keep, :]
        total += weights[k] * float(s.sum())
    return from_half_spectrum(x_half, n3), total / n3


def tsvt(a, tau: float) -> DenseTensor:
    """Tensor singular value thresholding, the proximal operator of tau * TNN.

    Every Fourier-slice singular value is shrunk by tau; tsvt(a, 0) = a.

    Raises:
        ValueError: If tau is negative.
    """
    return prox_tnn(a, tau)[0]


def _project_out(z: DenseTensor, u: DenseTensor, v: DenseTensor) -> DenseTensor:
    """(I - U * U^*) * Z * (I - V * V^*) evaluated in the Fourier domain."""
    if u.shape[1] == 0:
        return z.copy()
    n3 = z.shape[2]
    z_half = half_spectrum(z)
    u_half = half_spectrum(u)
    v_half = half_spectrum(v)
    left = z_half - np.einsum("irk,rbk->ibk", u_half,
                              np.einsum("jrk,jbk->rbk", u_half.conj(), z_half))
    out = left - np.einsum("iak,jak->ijk",
                           np.einsum("ibk,brk->irk", left, v_half), v_half.conj())
    return from_half_spectrum(out, n3)


def tnn_subgradient(a, w_scale: float = 0.0, seed=None) -> Subgradient:
    """A subgradient G = U * V^* + W of the TNN at a.

    W is a random element of T-perp (U^* * W = 0, W * V = 0) rescaled to
    spectral norm w_scale. For the zero tensor the subdifferential is the
    whole unit spectral-norm ball and the W-only element is returned.

    Args:
        a: n1 x n2 x n3 tensor.
        w_scale: Spectral norm of W, in [0, 1].
        seed: Seed or numpy Generator for sampling W.

    Returns:
        The Subgradient.

    Raises:
        ValueError: If w_scale is outside [0, 1].
    """
    if not 0.0 <= w_scale <= 1.0:
        raise ValueError(f"w_scale must be in [0, 1], got {w_scale}")
    a = as_dense(a)
    n1, n2, n3 = a.shape
    factors = tsvd(a, mode="skinny")
    u, v = factors.U, factors.V

    w = np.zeros_like(a)
    if w_scale > 0:
        rng = np.random.default_rng(seed)
        w = _project_out(rng.standard_normal(a.shape), u, v)
        w_norm = spectral_norm(w)
        if w_norm > 0:
            w *= w_scale / w_norm
        else:
            logger.debug("T-perp is trivial at this point; W = 0")

    if factors.tubal_rank == 0:
        return Subgradient(G=w, W=w, U=u, V=v)

    u_half = half_spectrum(u)
    v_half = half_spectrum(v)
    uv = from_half_spectrum(np.einsum("irk,jrk->ijk", u_half, v_half.conj()), n3)
    return Subgradient(G=uv + w, W=w, U=u, V=v)


def is_tnn_subgradient(g, a, tol: float = 1e-6) -> bool:
    """Membership test G in the TNN subdifferential at A.

    Uses the characterization <G, A> = ||A||_* and ||G|| <= 1.

    Args:
        g: Candidate subgradient.
        a: Point of evaluation.
        tol: Slack applied to both conditions (relative for the first).

    Returns:
        True if both conditions hold within tolerance.
    """
    norm_a = tnn(a)
    pairing_ok = abs(inner_product(g, a) - norm_a) <= tol * max(1.0, norm_a)
    return bool(pairing_ok and spectral_norm(g) <= 1.0 + tol)
