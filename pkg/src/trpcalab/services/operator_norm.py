"""Operator-norm estimation for self-adjoint maps on tensors."""

import logging
from typing import Callable, NamedTuple

import numpy as np

from ..errors import TrpcaLabError
from ..tensor.models import DenseTensor, Shape3
from ..tensor.transforms import frobenius_norm, inner_product
from .random_models import rng_for

logger = logging.getLogger(__name__)

TensorOperator = Callable[[DenseTensor], DenseTensor]

MAX_MATERIALIZE_SIZE = 1024


class OperatorTooLargeError(TrpcaLabError, ValueError):
    """Raised when a dense materialization would exceed the size cap."""
    pass


class OperatorNormEstimate(NamedTuple):
    """Result of a power iteration.

    value is sqrt(eigenvalue), the norm of A when the iterated map is A^* A.
    """
    value: float
    eigenvalue: float
    iterations: int
    converged: bool


def operator_norm(op: TensorOperator, shape, tol: float = 1e-10, max_iter: int = 1000,
                  seed: int = 0) -> OperatorNormEstimate:
    """Estimate sqrt(lambda_max) of a self-adjoint PSD map by power iteration.

    Args:
        op: Self-adjoint positive semidefinite map on tensors of the given shape.
        shape: Tensor shape the map acts on.
        tol: Stop when |lambda_t - lambda_{t-1}| <= tol * lambda_t.
        max_iter: Iteration cap.
        seed: Seed of the random start.

    Returns:
        The estimate. When max_iter is hit, converged is False and the last
        Rayleigh quotient is returned.

    Raises:
        ValueError: If tol is not positive or max_iter is below 1.
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    if max_iter < 1:
        raise ValueError(f"max_iter must be at least 1, got {max_iter}")
    shape = Shape3.of(shape)
    x = rng_for(seed, "power-iteration").standard_normal(shape)
    x /= frobenius_norm(x)

    eigenvalue = None
    for iteration in range(1, max_iter + 1):
        y = op(x)
        rayleigh = max(inner_product(x, y), 0.0)
        y_norm = frobenius_norm(y)
        if y_norm == 0.0:
            logger.debug("Power iteration hit the null space at iteration %d", iteration)
            return OperatorNormEstimate(0.0, 0.0, iteration, True)
        if eigenvalue is not None and abs(rayleigh - eigenvalue) <= tol * rayleigh:
            logger.debug("Power iteration converged at %d iterations, lambda=%.12g",
                         iteration, rayleigh)
            return OperatorNormEstimate(float(np.sqrt(rayleigh)), rayleigh, iteration, True)
        eigenvalue = rayleigh
        x = y / y_norm

    logger.warning("Power iteration did not converge in %d iterations (lambda=%.12g)",
                   max_iter, eigenvalue)
    return OperatorNormEstimate(float(np.sqrt(eigenvalue)), eigenvalue, max_iter, False)


def materialize(op: TensorOperator, shape, max_size: int = MAX_MATERIALIZE_SIZE) -> np.ndarray:
    """Dense N x N matrix of a linear map on tensors, N = n1 * n2 * n3.

    Column m is op applied to the m-th basis tensor in C order.

    Raises:
        OperatorTooLargeError: If N exceeds max_size.
    """
    shape = Shape3.of(shape)
    if shape.size > max_size:
        raise OperatorTooLargeError(
            f"Refusing to materialize a {shape.size} x {shape.size} operator (cap {max_size})"
        )
    matrix = np.empty((shape.size, shape.size))
    basis = np.zeros(shape.size)
    for m in range(shape.size):
        basis[m] = 1.0
        matrix[:, m] = np.asarray(op(basis.reshape(shape))).ravel()
        basis[m] = 0.0
    return matrix
