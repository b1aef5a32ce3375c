"""Mode-3 Fourier transforms, circulant oracles and elementwise norms.

The forward transform is the unnormalized DFT along the tube axis; the
inverse carries the 1/n3 factor. Under this convention
<A, B> = (1/n3) Re <A_bar, B_bar>.

bcirc and bdiag build explicit O(n^2 n3^2) matrices and exist only as
reference oracles for tests and small experiments.
"""

import numpy as np
import scipy.fft as sp_fft
import scipy.linalg as sp_linalg

from ..errors import TrpcaLabError
from ..settings import get_settings
from .models import DenseTensor, SpectralTensor, as_dense, require_same_shape


class ConjugateSymmetryError(TrpcaLabError):
    """Raised when an inverse DFT leaves an imaginary part above tolerance."""

    def __init__(self, residual: float, threshold: float):
        super().__init__(
            f"Spectral tensor is not conjugate symmetric: max imaginary residual "
            f"{residual:.3e} exceeds {threshold:.3e}"
        )
        self.residual = residual
        self.threshold = threshold


class BlockStructureError(TrpcaLabError):
    """Raised when a matrix handed to bdiag_fold is not block diagonal."""

    def __init__(self, residual: float, threshold: float):
        super().__init__(
            f"Matrix has off-block-diagonal mass {residual:.3e} above {threshold:.3e}"
        )
        self.residual = residual
        self.threshold = threshold


def dft_mode3(t) -> SpectralTensor:
    """Unnormalized DFT of every tube t[i, j, :].

    Args:
        t: Real n1 x n2 x n3 tensor.

    Returns:
        The complex spectral tensor of the same shape.
    """
    t = as_dense(t)
    return sp_fft.fft(t, axis=2, workers=get_settings().fft_workers)


def conjugate_symmetry_residual(t: SpectralTensor) -> float:
    """Largest imaginary part left after the inverse DFT of t."""
    t = np.asarray(t, dtype=np.complex128)
    if t.size == 0:
        return 0.0
    back = sp_fft.ifft(t, axis=2, workers=get_settings().fft_workers)
    return float(np.max(np.abs(back.imag)))


def idft_mode3(t: SpectralTensor, tol: float | None = None) -> DenseTensor:
    """Inverse of dft_mode3, returning a real tensor.

    Args:
        t: Complex n1 x n2 x n3 spectral tensor.
        tol: Relative tolerance on the imaginary residual, scaled by the
            Frobenius norm of t. Defaults to the configured conj_symmetry_tol.

    Returns:
        The real tensor whose DFT is t.

    Raises:
        ConjugateSymmetryError: If the residual imaginary part exceeds
            tol * ||t||_F, i.e. t is not the transform of a real tensor.
    """
    t = np.asarray(t, dtype=np.complex128)
    if t.ndim != 3:
        raise ValueError(f"Spectral tensor must be 3-way, got ndim={t.ndim}")
    if tol is None:
        tol = get_settings().conj_symmetry_tol

    back = sp_fft.ifft(t, axis=2, workers=get_settings().fft_workers)
    residual = float(np.max(np.abs(back.imag))) if back.size else 0.0
    threshold = tol * float(np.linalg.norm(t))
    if residual > threshold:
        raise ConjugateSymmetryError(residual, threshold)
    return np.ascontiguousarray(back.real)


def unfold_column(t) -> np.ndarray:
    """Stack the frontal slices vertically into an (n1*n3) x n2 matrix."""
    t = np.asarray(t)
    n1, n2, n3 = t.shape
    return np.transpose(t, (2, 0, 1)).reshape(n3 * n1, n2)


def fold_column(m: np.ndarray, n3: int) -> np.ndarray:
    """Inverse of unfold_column."""
    rows, n2 = m.shape
    if rows % n3:
        raise ValueError(f"Row count {rows} is not a multiple of n3={n3}")
    return np.ascontiguousarray(np.transpose(m.reshape(n3, rows // n3, n2), (1, 2, 0)))


def bcirc(t) -> np.ndarray:
    """Block-circulant matrix of the frontal slices.

    Block (p, q) of the (n1*n3) x (n2*n3) result is the frontal slice
    (p - q) mod n3.

    Args:
        t: n1 x n2 x n3 tensor (real or complex).

    Returns:
        The block-circulant matrix.
    """
    t = np.asarray(t)
    n1, n2, n3 = t.shape
    out = np.zeros((n1 * n3, n2 * n3), dtype=t.dtype)
    for p in range(n3):
        for q in range(n3):
            out[p * n1:(p + 1) * n1, q * n2:(q + 1) * n2] = t[:, :, (p - q) % n3]
    return out


def bdiag_unfold(t: SpectralTensor) -> np.ndarray:
    """Place the Fourier slices of t on the diagonal of a block matrix."""
    t = np.asarray(t)
    return sp_linalg.block_diag(*(t[:, :, k] for k in range(t.shape[2])))


def bdiag_fold(m: np.ndarray, n3: int, tol: float | None = None) -> SpectralTensor:
    """Read the diagonal blocks of a block-diagonal matrix back into a tensor.

    Args:
        m: (n1*n3) x (n2*n3) block-diagonal matrix.
        n3: Number of diagonal blocks.
        tol: Relative tolerance on off-block mass, scaled by ||m||_F.
            Defaults to the configured block_tol.

    Returns:
        The n1 x n2 x n3 tensor of diagonal blocks.

    Raises:
        BlockStructureError: If the off-block-diagonal mass exceeds tolerance.
    """
    m = np.asarray(m)
    rows, cols = m.shape
    if rows % n3 or cols % n3:
        raise ValueError(f"Matrix of shape {m.shape} cannot hold {n3} equal blocks")
    n1, n2 = rows // n3, cols // n3
    if tol is None:
        tol = get_settings().block_tol

    out = np.zeros((n1, n2, n3), dtype=m.dtype)
    off = m.copy()
    for k in range(n3):
        block = (slice(k * n1, (k + 1) * n1), slice(k * n2, (k + 1) * n2))
        out[:, :, k] = m[block]
        off[block] = 0
    residual = float(np.linalg.norm(off))
    threshold = tol * float(np.linalg.norm(m))
    if residual > threshold:
        raise BlockStructureError(residual, threshold)
    return out


def inner_product(a, b) -> float:
    """Sum of elementwise products <a, b>.

    Raises:
        ShapeMismatchError: If a and b differ in shape.
    """
    require_same_shape(a, b)
    return float(np.vdot(np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)))


def spectral_inner_product(a_bar: SpectralTensor, b_bar: SpectralTensor) -> float:
    """(1/n3) Re <a_bar, b_bar>, the Fourier-domain form of inner_product."""
    require_same_shape(a_bar, b_bar)
    n3 = np.shape(a_bar)[2]
    return float(np.real(np.vdot(a_bar, b_bar))) / n3


def frobenius_norm(t) -> float:
    """Frobenius norm sqrt(sum t_ijk^2)."""
    return float(np.linalg.norm(np.asarray(t).ravel()))


def infinity_norm(t) -> float:
    """Largest absolute entry; 0 for an empty tensor."""
    t = np.asarray(t)
    return float(np.max(np.abs(t))) if t.size else 0.0
