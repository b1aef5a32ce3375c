"""Data carriers for third-order tensors.

Tensors are plain numpy arrays of shape (n1, n2, n3) in C order, so the
tube index k is the fastest-varying one and every tube t[i, j, :] is
contiguous. Frontal slices are t[:, :, k].
"""

from typing import NamedTuple

import numpy as np
import numpy.typing as npt

from ..errors import ShapeMismatchError

# Real n1 x n2 x n3 tensor (L, S, Z, M, ...).
DenseTensor = npt.NDArray[np.float64]

# Complex tensor in the mode-3 Fourier domain (the "bar" objects).
SpectralTensor = npt.NDArray[np.complex128]


class Shape3(NamedTuple):
    """Dimensions of a third-order tensor."""
    n1: int
    n2: int
    n3: int

    @property
    def n_max(self) -> int:
        """n(1) = max(n1, n2)."""
        return max(self.n1, self.n2)

    @property
    def n_min(self) -> int:
        """n(2) = min(n1, n2)."""
        return min(self.n1, self.n2)

    @property
    def size(self) -> int:
        """Total number of entries n1 * n2 * n3."""
        return self.n1 * self.n2 * self.n3

    @classmethod
    def of(cls, shape) -> "Shape3":
        """Validate and convert a 3-tuple of dimensions.

        Args:
            shape: Any sequence of three positive integers, or a Shape3.

        Returns:
            The validated Shape3.

        Raises:
            ShapeMismatchError: If the shape is not three positive integers.
        """
        dims = tuple(int(d) for d in shape)
        if len(dims) != 3:
            raise ShapeMismatchError(f"Expected a 3-way shape, got {tuple(shape)}")
        if any(d < 1 for d in dims):
            raise ShapeMismatchError(f"All dimensions must be >= 1, got {dims}")
        return cls(*dims)


def as_dense(t, name: str = "tensor") -> DenseTensor:
    """Check that an array is a finite real third-order tensor.

    Args:
        t: Array-like input.
        name: Name used in error messages.

    Returns:
        The input as a float64 numpy array (no copy when already float64).

    Raises:
        ShapeMismatchError: If the input is not three-dimensional.
        ValueError: If the input has non-finite entries.
    """
    arr = np.asarray(t, dtype=np.float64)
    if arr.ndim != 3:
        raise ShapeMismatchError(f"{name} must be a 3-way tensor, got ndim={arr.ndim}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def shape_of(t) -> Shape3:
    """Return the Shape3 of a third-order array."""
    return Shape3.of(np.shape(t))


def require_same_shape(a, b) -> None:
    """Raise ShapeMismatchError unless a and b have the same shape."""
    if np.shape(a) != np.shape(b):
        raise ShapeMismatchError(f"Shape mismatch: {np.shape(a)} vs {np.shape(b)}")
