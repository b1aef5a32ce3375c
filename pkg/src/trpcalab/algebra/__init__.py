"""The t-product algebra: products, t-SVD, norms, ranks and the TNN prox."""

from .tproduct import (
    basis_e,
    basis_e_dot,
    basis_e_ring,
    identity_tensor,
    tprod,
    tprod_chain,
    ttranspose,
)
from .tsvd import (
    Subgradient,
    SvdConvergenceError,
    TSvdFactors,
    average_rank,
    average_rank_conjugate,
    fourier_singular_values,
    is_tnn_subgradient,
    prox_tnn,
    spectral_norm,
    tnn,
    tnn_subgradient,
    tsvd,
    tsvt,
    tubal_rank,
)

__all__ = [
    "basis_e",
    "basis_e_dot",
    "basis_e_ring",
    "identity_tensor",
    "tprod",
    "tprod_chain",
    "ttranspose",
    "Subgradient",
    "SvdConvergenceError",
    "TSvdFactors",
    "average_rank",
    "average_rank_conjugate",
    "fourier_singular_values",
    "is_tnn_subgradient",
    "prox_tnn",
    "spectral_norm",
    "tnn",
    "tnn_subgradient",
    "tsvd",
    "tsvt",
    "tubal_rank",
]
