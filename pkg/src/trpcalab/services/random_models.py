"""Samplers for Bernoulli supports, sign tensors, low-tubal-rank tensors and
the golfing partition.

Every sampler takes either an integer seed or a ready numpy Generator. An
integer seed is turned into a Philox stream keyed by (seed, purpose), so
the same seed gives the same sample regardless of which other samplers ran.
"""

import logging
import math
import zlib
from dataclasses import dataclass

import numpy as np

from ..algebra.tproduct import tprod, ttranspose
from ..errors import TrpcaLabError
from ..tensor.models import DenseTensor, Shape3
from .projections import SupportSet, TangentSpace

logger = logging.getLogger(__name__)

SeedLike = int | np.random.Generator


class GolfingConfigError(TrpcaLabError, ValueError):
    """Raised when rho, j0 and q do not describe a valid golfing partition."""
    pass


def _stream_word(part) -> int:
    if isinstance(part, str):
        return zlib.crc32(part.encode("utf-8"))
    return int(part)


def rng_for(seed: int, *stream) -> np.random.Generator:
    """Counter-based generator for a (seed, purpose, point, trial...) key.

    Args:
        seed: Non-negative 64-bit experiment seed.
        *stream: Integers or strings naming the sub-stream; strings are
            hashed with CRC-32.

    Returns:
        A Philox-backed Generator. Distinct stream keys give independent
        streams; equal keys give identical streams.
    """
    if seed < 0:
        raise ValueError(f"Seed must be non-negative, got {seed}")
    words = tuple(_stream_word(part) for part in stream)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=words)))


def _generator(seed: SeedLike, purpose: str) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return rng_for(seed, purpose)


def _check_probability(rho: float) -> None:
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"Probability must lie in [0, 1], got {rho}")


@dataclass(frozen=True)
class GolfingConfig:
    """Parameters of the golfing partition: (1 - q)^j0 = rho."""
    j0: int
    q: float
    rho: float

    def __post_init__(self):
        if self.j0 < 1:
            raise GolfingConfigError(f"j0 must be at least 1, got {self.j0}")
        if not 0.0 < self.q <= 1.0:
            raise GolfingConfigError(f"q must lie in (0, 1], got {self.q}")
        if not 0.0 <= self.rho < 1.0:
            raise GolfingConfigError(f"rho must lie in [0, 1), got {self.rho}")
        if abs((1.0 - self.q) ** self.j0 - self.rho) > 1e-12:
            raise GolfingConfigError(
                f"(1 - q)^j0 = {(1.0 - self.q) ** self.j0:.15g} does not match rho = {self.rho}"
            )
        if self.q * self.j0 < 1.0 - self.rho - 1e-12:
            raise GolfingConfigError(f"q * j0 = {self.q * self.j0} is below 1 - rho")

    @classmethod
    def from_rho(cls, rho: float, j0: int) -> "GolfingConfig":
        """Solve (1 - q)^j0 = rho for q."""
        if not 0.0 <= rho < 1.0:
            raise GolfingConfigError(f"rho must lie in [0, 1), got {rho}")
        if j0 < 1:
            raise GolfingConfigError(f"j0 must be at least 1, got {j0}")
        return cls(j0=j0, q=1.0 - rho ** (1.0 / j0), rho=rho)


def default_j0(shape) -> int:
    """2 * ceil(ln(n(1) * n3)), at least 1."""
    shape = Shape3.of(shape)
    return max(1, 2 * math.ceil(math.log(shape.n_max * shape.n3)))


def sample_bernoulli_support(shape, rho: float, seed: SeedLike) -> SupportSet:
    """Omega ~ Ber(rho): each index included independently with probability rho."""
    _check_probability(rho)
    rng = _generator(seed, "support")
    return SupportSet(rng.random(Shape3.of(shape)) < rho)


def sample_sign_tensor(shape, rho: float, seed: SeedLike) -> DenseTensor:
    """Entries +1 and -1 with probability rho / 2 each, else 0.

    The support and the signs are drawn from independent uniforms.
    """
    _check_probability(rho)
    rng = _generator(seed, "sign-tensor")
    shape = Shape3.of(shape)
    support = rng.random(shape) < rho
    signs = np.where(rng.random(shape) < 0.5, 1.0, -1.0)
    return np.where(support, signs, 0.0)


def sample_signs(omega: SupportSet, seed: SeedLike) -> DenseTensor:
    """Symmetric i.i.d. signs on omega, zero elsewhere."""
    rng = _generator(seed, "signs")
    signs = np.where(rng.random(omega.shape) < 0.5, 1.0, -1.0)
    return np.where(omega.mask, signs, 0.0)


def sample_low_tubal_rank(shape, r: int, seed: SeedLike) -> tuple[DenseTensor, TangentSpace]:
    """Random P * Q^* with standard normal P (n1 x r x n3) and Q (n2 x r x n3).

    Returns:
        The tensor and the tangent space of its rank-r skinny t-SVD.

    Raises:
        ValueError: If r is negative or exceeds min(n1, n2).
    """
    shape = Shape3.of(shape)
    if not 0 <= r <= shape.n_min:
        raise ValueError(f"Tubal rank {r} outside [0, {shape.n_min}] for shape {tuple(shape)}")
    if r == 0:
        return np.zeros(shape), TangentSpace.empty(shape)
    rng = _generator(seed, "low-rank")
    p = rng.standard_normal((shape.n1, r, shape.n3))
    q = rng.standard_normal((shape.n2, r, shape.n3))
    l = tprod(p, ttranspose(q))
    return l, TangentSpace.from_tensor(l, rank=r)


def partition_complement(omega: SupportSet, j0: int, seed: SeedLike,
                         rho: float | None = None) -> list[SupportSet]:
    """Split the complement of omega into j0 overlapping Bernoulli(q) rounds.

    Each index outside omega gets a Ber(q)^j0 membership pattern conditioned
    on at least one inclusion; indices in omega get none. The union of the
    rounds is exactly the complement of omega.

    Args:
        omega: The corruption support.
        j0: Number of golfing rounds.
        seed: Seed or Generator.
        rho: Model density of omega used to solve for q. Defaults to the
            empirical density of omega.

    Returns:
        The j0 supports Omega_1, ..., Omega_j0.

    Raises:
        GolfingConfigError: If j0 < 1 or rho is not in [0, 1).
    """
    config = GolfingConfig.from_rho(omega.density if rho is None else rho, j0)
    rng = _generator(seed, "partition")

    free = np.flatnonzero(~omega.mask.ravel())
    patterns = rng.random((free.size, j0)) < config.q
    empty = ~patterns.any(axis=1)
    redraws = 0
    while empty.any():
        patterns[empty] = rng.random((int(empty.sum()), j0)) < config.q
        empty = ~patterns.any(axis=1)
        redraws += 1
    logger.debug("Golfing partition: j0=%d q=%.6g, %d free indices, %d redraw rounds",
                 j0, config.q, free.size, redraws)

    rounds = []
    for j in range(j0):
        mask = np.zeros(omega.shape.size, dtype=bool)
        mask[free[patterns[:, j]]] = True
        rounds.append(SupportSet(mask.reshape(omega.shape)))
    return rounds
