"""Tensor storage, mode-3 transforms and the TNS3 file format."""

from .models import DenseTensor, Shape3, SpectralTensor, as_dense, shape_of
from .transforms import (
    BlockStructureError,
    ConjugateSymmetryError,
    bcirc,
    bdiag_fold,
    bdiag_unfold,
    conjugate_symmetry_residual,
    dft_mode3,
    fold_column,
    frobenius_norm,
    idft_mode3,
    infinity_norm,
    inner_product,
    spectral_inner_product,
    unfold_column,
)
from .tns3 import (
    BadMagicError,
    DimensionOverflowError,
    TensorFormatError,
    TrailingDataError,
    TruncatedPayloadError,
    UnsupportedVersionError,
    read_tensor,
    write_tensor,
)

__all__ = [
    "DenseTensor",
    "Shape3",
    "SpectralTensor",
    "as_dense",
    "shape_of",
    "BlockStructureError",
    "ConjugateSymmetryError",
    "bcirc",
    "bdiag_fold",
    "bdiag_unfold",
    "conjugate_symmetry_residual",
    "dft_mode3",
    "fold_column",
    "frobenius_norm",
    "idft_mode3",
    "infinity_norm",
    "inner_product",
    "spectral_inner_product",
    "unfold_column",
    "BadMagicError",
    "DimensionOverflowError",
    "TensorFormatError",
    "TrailingDataError",
    "TruncatedPayloadError",
    "UnsupportedVersionError",
    "read_tensor",
    "write_tensor",
]
