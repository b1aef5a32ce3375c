"""Support and tangent-space projections and incoherence measurement.

P_Omega keeps the entries of a support set. P_T projects onto the tangent
space T = {U * Y^* + W * V^*} of a low-tubal-rank tensor:

    P_T(Z) = U*U^**Z + Z*V*V^* - U*U^**Z*V*V^*

computed slicewise in the Fourier domain from the skinny factors.
"""

import logging
from typing import Iterable, NamedTuple

import numpy as np

from ..algebra.tproduct import basis_e_dot, from_half_spectrum, half_spectrum, tprod, ttranspose
from ..algebra.tsvd import tsvd
from ..errors import ShapeMismatchError, TrpcaLabError
from ..settings import get_settings
from ..tensor.models import DenseTensor, Shape3, as_dense
from ..tensor.transforms import frobenius_norm, infinity_norm

logger = logging.getLogger(__name__)


class NotOrthonormalError(TrpcaLabError):
    """Raised when tangent-space factors are not t-orthonormal."""

    def __init__(self, name: str, residual: float):
        super().__init__(f"{name}^* * {name} deviates from the identity by {residual:.3e}")
        self.residual = residual


class IncoherenceError(TrpcaLabError):
    """Raised when incoherence is requested for an empty tangent space."""
    pass


def _checked_index(index, shape: Shape3) -> tuple[int, int, int]:
    i, j, k = (int(x) for x in index)
    if not (0 <= i < shape.n1 and 0 <= j < shape.n2 and 0 <= k < shape.n3):
        raise IndexError(f"Index {(i, j, k)} outside shape {tuple(shape)}")
    return i, j, k


class SupportSet:
    """An index set Omega of a third-order tensor, stored as a boolean mask."""

    def __init__(self, mask):
        mask = np.array(mask, dtype=bool)
        if mask.ndim != 3:
            raise ShapeMismatchError(f"Support mask must be 3-way, got ndim={mask.ndim}")
        mask.setflags(write=False)
        self._mask = mask
        self.shape = Shape3.of(mask.shape)

    @classmethod
    def from_indices(cls, shape, indices: Iterable[tuple[int, int, int]]) -> "SupportSet":
        """Build a support from (i, j, k) triples.

        Raises:
            IndexError: If a triple lies outside the shape.
        """
        shape = Shape3.of(shape)
        mask = np.zeros(shape, dtype=bool)
        for index in indices:
            mask[_checked_index(index, shape)] = True
        return cls(mask)

    @classmethod
    def full(cls, shape) -> "SupportSet":
        return cls(np.ones(Shape3.of(shape), dtype=bool))

    @classmethod
    def empty(cls, shape) -> "SupportSet":
        return cls(np.zeros(Shape3.of(shape), dtype=bool))

    @property
    def mask(self) -> np.ndarray:
        """Read-only boolean mask, True on Omega."""
        return self._mask

    @property
    def indices(self) -> set[tuple[int, int, int]]:
        return {tuple(int(x) for x in idx) for idx in np.argwhere(self._mask)}

    @property
    def density(self) -> float:
        return len(self) / self.shape.size

    def complement(self) -> "SupportSet":
        return SupportSet(~self._mask)

    def __or__(self, other: "SupportSet") -> "SupportSet":
        return SupportSet(self._mask | other.mask)

    def __and__(self, other: "SupportSet") -> "SupportSet":
        return SupportSet(self._mask & other.mask)

    def __len__(self) -> int:
        return int(np.count_nonzero(self._mask))

    def __contains__(self, index) -> bool:
        """Membership of an (i, j, k) triple.

        Raises:
            IndexError: If the triple lies outside the shape.
        """
        return bool(self._mask[_checked_index(index, self.shape)])

    def __eq__(self, other) -> bool:
        if not isinstance(other, SupportSet):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self._mask, other.mask))

    def __repr__(self) -> str:
        return f"<SupportSet(shape={tuple(self.shape)}, size={len(self)})>"


class TangentSpace:
    """Tangent space T of the tensors U * Y^* + W * V^*.

    U (n1 x r x n3) and V (n2 x r x n3) must be t-orthonormal. r = 0 is
    allowed and means T = {0}.
    """

    def __init__(self, U, V, check: bool = True):
        """Initialize the tangent space.

        Args:
            U: n1 x r x n3 factor with U^* * U = I_r.
            V: n2 x r x n3 factor with V^* * V = I_r.
            check: Verify orthonormality against the configured tolerance.

        Raises:
            ShapeMismatchError: If the factors disagree in r or n3.
            NotOrthonormalError: If check is set and a factor is not orthonormal.
        """
        U = np.asarray(U, dtype=np.float64)
        V = np.asarray(V, dtype=np.float64)
        if U.ndim != 3 or V.ndim != 3 or U.shape[1:] != V.shape[1:]:
            raise ShapeMismatchError(
                f"Tangent factors must be n1 x r x n3 and n2 x r x n3, got {U.shape}, {V.shape}"
            )
        self.U = U
        self.V = V
        self.shape = Shape3(U.shape[0], V.shape[0], U.shape[2])
        self.rank = U.shape[1]
        if self.rank:
            self._u_half = half_spectrum(U)
            self._v_half = half_spectrum(V)
        if check and self.rank:
            tol = get_settings().orthonormality_tol
            for name, half in (("U", self._u_half), ("V", self._v_half)):
                gram = np.einsum("irk,isk->rsk", half.conj(), half)
                residual = float(np.max(np.abs(gram - np.eye(self.rank)[:, :, None])))
                if residual > tol:
                    raise NotOrthonormalError(name, residual)

    @classmethod
    def empty(cls, shape) -> "TangentSpace":
        """The trivial tangent space T = {0}."""
        n1, n2, n3 = Shape3.of(shape)
        return cls(np.zeros((n1, 0, n3)), np.zeros((n2, 0, n3)))

    @classmethod
    def from_tensor(cls, l, rank: int | None = None) -> "TangentSpace":
        """Tangent space at l from its skinny t-SVD.

        Args:
            l: Low-tubal-rank tensor.
            rank: Keep this many singular tubes instead of the numerical tubal rank.
        """
        factors = tsvd(l, mode="skinny")
        r = factors.tubal_rank if rank is None else min(rank, factors.tubal_rank)
        logger.debug("Tangent space at tubal rank %d (numerical rank %d)", r, factors.tubal_rank)
        return cls(factors.U[:, :r, :], factors.V[:, :r, :])

    def _check(self, z) -> DenseTensor:
        z = as_dense(z)
        if z.shape != self.shape:
            raise ShapeMismatchError(f"Tensor shape {z.shape} does not match T of shape {tuple(self.shape)}")
        return z

    def uv(self) -> DenseTensor:
        """U * V^*."""
        if not self.rank:
            return np.zeros(self.shape)
        return from_half_spectrum(
            np.einsum("irk,jrk->ijk", self._u_half, self._v_half.conj()), self.shape.n3
        )

    def project(self, z) -> DenseTensor:
        """P_T(z)."""
        z = self._check(z)
        if not self.rank:
            return np.zeros_like(z)
        u, v = self._u_half, self._v_half
        z_half = half_spectrum(z)
        # Contract against the r-wide factors first.
        u_z = np.einsum("jrk,jbk->rbk", u.conj(), z_half)
        z_v = np.einsum("iak,ark->irk", z_half, v)
        u_z_v = np.einsum("rak,ask->rsk", u_z, v)
        uu_z = np.einsum("irk,rbk->ibk", u, u_z)
        z_vv = np.einsum("irk,brk->ibk", z_v, v.conj())
        uu_z_vv = np.einsum("irk,rbk->ibk", u, np.einsum("rsk,bsk->rbk", u_z_v, v.conj()))
        return from_half_spectrum(uu_z + z_vv - uu_z_vv, self.shape.n3)

    def project_complement(self, z) -> DenseTensor:
        """P_T-perp(z) = z - P_T(z)."""
        z = self._check(z)
        return z - self.project(z)

    def __repr__(self) -> str:
        return f"<TangentSpace(shape={tuple(self.shape)}, rank={self.rank})>"


class IncoherenceReport(NamedTuple):
    """Measured incoherence parameters of a tangent space."""
    mu_u: float
    mu_v: float
    mu_uv: float
    mu: float
    r: int


def _check_support(z: DenseTensor, omega: SupportSet) -> None:
    if z.shape != omega.shape:
        raise ShapeMismatchError(f"Tensor shape {z.shape} does not match support {tuple(omega.shape)}")


def project_omega(z, omega: SupportSet) -> DenseTensor:
    """P_Omega(z): keep the entries on Omega, zero the rest.

    Raises:
        ShapeMismatchError: If z and omega differ in shape.
    """
    z = as_dense(z)
    _check_support(z, omega)
    return np.where(omega.mask, z, 0.0)


def project_omega_complement(z, omega: SupportSet) -> DenseTensor:
    """P_Omega-perp(z): zero the entries on Omega."""
    z = as_dense(z)
    _check_support(z, omega)
    return np.where(omega.mask, 0.0, z)


def project_t(z, t: TangentSpace) -> DenseTensor:
    """P_T(z) for the tangent space t."""
    return t.project(z)


def project_t_complement(z, t: TangentSpace) -> DenseTensor:
    """P_T-perp(z) = (I - U*U^*) * z * (I - V*V^*)."""
    return t.project_complement(z)


def pt_basis_norm_sq(t: TangentSpace, i: int, j: int, k: int) -> float:
    """||P_T(e_ijk)||_F^2 from the factor rows.

    Evaluates ||U^* e_i||^2 + ||V^* e_j||^2 - ||U^* e_i * e_k * e_j^* V||^2
    without forming P_T(e_ijk).

    Raises:
        IndexError: If an index is out of range.
    """
    n1, n2, n3 = t.shape
    if not (0 <= i < n1 and 0 <= j < n2 and 0 <= k < n3):
        raise IndexError(f"Index {(i, j, k)} outside shape {tuple(t.shape)}")
    if not t.rank:
        return 0.0
    u_row = t.U[i:i + 1, :, :]   # e_i^* * U, 1 x r x n3
    v_row = t.V[j:j + 1, :, :]   # e_j^* * V, 1 x r x n3
    cross = tprod(tprod(ttranspose(u_row), basis_e_dot(k, n3)), v_row)
    return (frobenius_norm(u_row) ** 2 + frobenius_norm(v_row) ** 2
            - frobenius_norm(cross) ** 2)


def incoherence_mu(t: TangentSpace) -> IncoherenceReport:
    """Measure the tensor incoherence parameters of a tangent space.

    mu_u = (n1 n3 / r) max_i ||U^* e_i||_F^2
    mu_v = (n2 n3 / r) max_j ||V^* e_j||_F^2
    mu_uv = (n1 n2 n3^2 / r) ||U * V^*||_inf^2

    Raises:
        IncoherenceError: If the tangent space has r = 0.
    """
    if not t.rank:
        raise IncoherenceError("Incoherence is undefined for r = 0")
    n1, n2, n3 = t.shape
    r = t.rank
    row_u = np.sum(t.U ** 2, axis=(1, 2))
    row_v = np.sum(t.V ** 2, axis=(1, 2))
    mu_u = n1 * n3 / r * float(row_u.max())
    mu_v = n2 * n3 / r * float(row_v.max())
    mu_uv = n1 * n2 * n3 ** 2 / r * infinity_norm(t.uv()) ** 2
    return IncoherenceReport(mu_u=mu_u, mu_v=mu_v, mu_uv=mu_uv,
                             mu=max(mu_u, mu_v, mu_uv), r=r)
