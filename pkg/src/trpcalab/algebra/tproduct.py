"""The t-product and its companions: transpose, identity and basis tensors.

Products are evaluated slicewise in the Fourier domain. Real inputs have
conjugate-symmetric spectra, so only the first n3 // 2 + 1 slices are
formed (rfft) and the result comes back through irfft, which is real by
construction.
"""

import numpy as np
import scipy.fft as sp_fft

from ..errors import ShapeMismatchError
from ..settings import get_settings
from ..tensor.models import DenseTensor, as_dense


def half_spectrum(t) -> np.ndarray:
    """Fourier slices 0 .. n3 // 2 of a real tensor."""
    return sp_fft.rfft(t, axis=2, workers=get_settings().fft_workers)


def from_half_spectrum(t_half: np.ndarray, n3: int) -> DenseTensor:
    """Real tensor whose first n3 // 2 + 1 Fourier slices are t_half."""
    return np.ascontiguousarray(
        sp_fft.irfft(t_half, n=n3, axis=2, workers=get_settings().fft_workers)
    )


def slice_weights(n3: int) -> np.ndarray:
    """Multiplicity of each half-spectrum slice in the full spectrum.

    Slice 0 (and the Nyquist slice for even n3) appears once; every other
    half-spectrum slice stands for itself and its conjugate partner.
    """
    weights = np.full(n3 // 2 + 1, 2.0)
    weights[0] = 1.0
    if n3 % 2 == 0:
        weights[-1] = 1.0
    return weights


def tprod(a, b) -> DenseTensor:
    """t-product a * b.

    Args:
        a: n1 x m x n3 tensor.
        b: m x n2 x n3 tensor.

    Returns:
        The n1 x n2 x n3 tensor fold(bcirc(a) @ unfold_column(b)).

    Raises:
        ShapeMismatchError: If the inner dimensions or n3 disagree.
    """
    a = as_dense(a, "a")
    b = as_dense(b, "b")
    if a.shape[1] != b.shape[0] or a.shape[2] != b.shape[2]:
        raise ShapeMismatchError(f"Cannot t-multiply {a.shape} by {b.shape}")
    n3 = a.shape[2]
    if a.size == 0 or b.size == 0:
        return np.zeros((a.shape[0], b.shape[1], n3))
    c_half = np.einsum("imk,mjk->ijk", half_spectrum(a), half_spectrum(b))
    return from_half_spectrum(c_half, n3)


def tprod_chain(*tensors) -> DenseTensor:
    """Left-to-right t-product of two or more tensors."""
    if len(tensors) < 2:
        raise ValueError("tprod_chain needs at least two tensors")
    out = tensors[0]
    for t in tensors[1:]:
        out = tprod(out, t)
    return out


def ttranspose(a) -> DenseTensor:
    """Tensor transpose a^*.

    Transposes every frontal slice and reverses the order of slices
    2 .. n3, so the Fourier slices of a^* are the conjugate transposes of
    the Fourier slices of a.
    """
    a = np.asarray(a, dtype=np.float64)
    at = np.transpose(a, (1, 0, 2))
    return np.ascontiguousarray(np.concatenate([at[:, :, :1], at[:, :, :0:-1]], axis=2))


def identity_tensor(n: int, n3: int) -> DenseTensor:
    """The n x n x n3 identity tensor: first frontal slice I_n, others zero."""
    out = np.zeros((n, n, n3))
    out[:, :, 0] = np.eye(n)
    return out


def _check_index(index: int, bound: int, name: str) -> None:
    if not 0 <= index < bound:
        raise IndexError(f"{name}={index} out of range [0, {bound})")


def basis_e_ring(i: int, n: int, n3: int) -> DenseTensor:
    """Column basis tensor: n x 1 x n3 with a single 1 at (i, 0, 0).

    Raises:
        IndexError: If i is not in [0, n).
    """
    _check_index(i, n, "i")
    out = np.zeros((n, 1, n3))
    out[i, 0, 0] = 1.0
    return out


def basis_e_dot(k: int, n3: int) -> DenseTensor:
    """Tube basis tensor: 1 x 1 x n3 with a single 1 at (0, 0, k).

    Raises:
        IndexError: If k is not in [0, n3).
    """
    _check_index(k, n3, "k")
    out = np.zeros((1, 1, n3))
    out[0, 0, k] = 1.0
    return out


def basis_e(i: int, j: int, k: int, shape) -> DenseTensor:
    """Basis tensor e_ijk with a single unit entry at (i, j, k).

    Equal to basis_e_ring(i) * basis_e_dot(k) * basis_e_ring(j)^*.

    Raises:
        IndexError: If any index is out of range.
    """
    n1, n2, n3 = shape
    _check_index(i, n1, "i")
    _check_index(j, n2, "j")
    _check_index(k, n3, "k")
    out = np.zeros((n1, n2, n3))
    out[i, j, k] = 1.0
    return out
