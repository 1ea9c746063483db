"""Truncated Fock-space matrices and the charge-space block algebra.

A :class:`ChargeFockMatrix` is a 2×2 matrix in charge space whose entries are
dense ``dim × dim`` Fock matrices. The charge-diagonal blocks form the even
(observable) part, the off-diagonal blocks the odd part.

Truncated identities are compared on interior indices only: ladder products
corrupt at most the top :data:`BOUNDARY_ROWS` levels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .config import N_MAX_MINIMUM
from .errors import DomainError, GridResolutionError
from .spectrum import SpectrumKind, chi_array, energy_levels, eps_array

Basis = Literal["standard", "feshbach-villars", "nonlocal"]
FockMatrix = NDArray[np.complex128]

BOUNDARY_ROWS = 2
GYRATION_CENTER_DIM = 4

TAU_0 = np.eye(2)
TAU_1 = np.array([[0.0, 1.0], [1.0, 0.0]])
I_TAU_2 = np.array([[0.0, 1.0], [-1.0, 0.0]])
TAU_3 = np.array([[1.0, 0.0], [0.0, -1.0]])


@dataclass(frozen=True)
class ChargeFockMatrix:
    """Charge-space block matrix; ``blocks[i, j]`` is the Fock block in row ``i``, column ``j``."""

    blocks: NDArray[np.complex128]
    basis: Basis = "standard"

    def __post_init__(self) -> None:
        blocks = np.asarray(self.blocks, dtype=complex)
        if blocks.ndim != 4 or blocks.shape[:2] != (2, 2) or blocks.shape[2] != blocks.shape[3]:
            raise DomainError(f"charge blocks must have shape (2, 2, d, d), got {blocks.shape}")
        if not np.all(np.isfinite(blocks)):
            raise DomainError("charge blocks must be finite")
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def from_pauli(
        cls,
        identity: ArrayLike | None = None,
        tau1: ArrayLike | None = None,
        i_tau2: ArrayLike | None = None,
        tau3: ArrayLike | None = None,
        *,
        basis: Basis = "standard",
    ) -> ChargeFockMatrix:
        """``identity ⊗ 1 + tau1 ⊗ τ₁ + i_tau2 ⊗ iτ₂ + tau3 ⊗ τ₃`` (Fock parts first)."""

        parts = [(identity, TAU_0), (tau1, TAU_1), (i_tau2, I_TAU_2), (tau3, TAU_3)]
        dims = {np.shape(fock)[0] for fock, _ in parts if fock is not None}
        if len(dims) != 1:
            raise DomainError("Pauli components must share one Fock dimension")
        dim = dims.pop()
        blocks = np.zeros((2, 2, dim, dim), dtype=complex)
        for fock, charge in parts:
            if fock is not None:
                blocks += np.einsum("ij,kl->ijkl", charge, np.asarray(fock, dtype=complex))
        return cls(blocks, basis)

    @classmethod
    def scalar(cls, fock: ArrayLike, basis: Basis = "standard") -> ChargeFockMatrix:
        """``fock ⊗ 1``."""
        return cls.from_pauli(identity=fock, basis=basis)

    @classmethod
    def from_charge_diagonals(
        cls, positive: ArrayLike, negative: ArrayLike, basis: Basis = "standard"
    ) -> ChargeFockMatrix:
        """Charge-even operator ``diag(positive, negative)``."""

        upper = np.asarray(positive, dtype=complex)
        lower = np.asarray(negative, dtype=complex)
        if upper.shape != lower.shape:
            raise DomainError(f"charge diagonals differ in shape: {upper.shape} vs {lower.shape}")
        blocks = np.zeros((2, 2, *upper.shape), dtype=complex)
        blocks[0, 0] = upper
        blocks[1, 1] = lower
        return cls(blocks, basis)

    @property
    def dim(self) -> int:
        return self.blocks.shape[2]

    def __matmul__(self, other: ChargeFockMatrix) -> ChargeFockMatrix:
        self._check_compatible(other)
        return ChargeFockMatrix(np.einsum("ikab,kjbc->ijac", self.blocks, other.blocks), self.basis)

    def __add__(self, other: ChargeFockMatrix) -> ChargeFockMatrix:
        self._check_compatible(other)
        return ChargeFockMatrix(self.blocks + other.blocks, self.basis)

    def __sub__(self, other: ChargeFockMatrix) -> ChargeFockMatrix:
        self._check_compatible(other)
        return ChargeFockMatrix(self.blocks - other.blocks, self.basis)

    def scaled(self, factor: complex) -> ChargeFockMatrix:
        return ChargeFockMatrix(factor * self.blocks, self.basis)

    def adjoint(self) -> ChargeFockMatrix:
        return ChargeFockMatrix(np.conj(np.transpose(self.blocks, (1, 0, 3, 2))), self.basis)

    def even_part(self) -> ChargeFockMatrix:
        blocks = np.zeros_like(self.blocks)
        blocks[0, 0] = self.blocks[0, 0]
        blocks[1, 1] = self.blocks[1, 1]
        return ChargeFockMatrix(blocks, self.basis)

    def odd_part(self) -> ChargeFockMatrix:
        blocks = np.zeros_like(self.blocks)
        blocks[0, 1] = self.blocks[0, 1]
        blocks[1, 0] = self.blocks[1, 0]
        return ChargeFockMatrix(blocks, self.basis)

    def to_dense(self) -> NDArray[np.complex128]:
        """The ``2d × 2d`` matrix with charge as the outer index."""
        return np.block([[self.blocks[0, 0], self.blocks[0, 1]], [self.blocks[1, 0], self.blocks[1, 1]]])

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.blocks))) if self.blocks.size else 0.0

    def _check_compatible(self, other: ChargeFockMatrix) -> None:
        if self.dim != other.dim:
            raise DomainError(f"Fock dimensions differ: {self.dim} != {other.dim}")


def _ladder(dim: int) -> NDArray[np.float64]:
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1)


def ladder_matrices(
    n_max: int,
) -> tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.float64]]:
    """``(b, b†, n̂)`` on levels ``0 .. n_max - 1`` with ``b|n⟩ = √n |n-1⟩``."""

    if n_max < N_MAX_MINIMUM:
        raise DomainError(f"n_max below minimum {N_MAX_MINIMUM}")
    b = _ladder(n_max)
    return b, b.T.copy(), np.diag(np.arange(n_max, dtype=float))


def deformed_annihilator(kind: SpectrumKind, n_max: int) -> NDArray[np.float64]:
    """``b ε(n̂)``: column ``n`` holds ``√n ε(n)`` in row ``n - 1``."""

    b, _, _ = ladder_matrices(n_max)
    return b * eps_array(kind, n_max)[np.newaxis, :]


def transform_matrix(kind: SpectrumKind, n_max: int, shift: int = 0) -> ChargeFockMatrix:
    """``U(n̂ + shift) = α + β τ₁`` with ``α, β = (E ± 1)/(2√E)``.

    Levels whose shifted index is negative get the identity.
    """

    levels = np.arange(n_max) + shift
    valid = levels >= 0
    energies = np.ones(n_max)
    if np.any(valid):
        energies[valid] = energy_levels(kind, int(levels[valid].max()) + 1)[levels[valid]]
    root = 2.0 * np.sqrt(energies)
    return ChargeFockMatrix.from_pauli(
        identity=np.diag((energies + 1.0) / root), tau1=np.diag((energies - 1.0) / root)
    )


def inverse_transform_matrix(kind: SpectrumKind, n_max: int, shift: int = 0) -> ChargeFockMatrix:
    """``U⁻¹ = α - β τ₁`` (``det U = α² - β² = 1``)."""

    u = transform_matrix(kind, n_max, shift)
    return ChargeFockMatrix.from_pauli(identity=u.blocks[0, 0], tau1=-u.blocks[0, 1])


def r_matrix(kind: SpectrumKind, n_max: int) -> ChargeFockMatrix:
    """``R(n̂) = ε(n̂) + χ(n̂) τ₁``."""

    return ChargeFockMatrix.from_pauli(
        identity=np.diag(eps_array(kind, n_max)), tau1=np.diag(chi_array(kind, n_max))
    )


def r_matrix_check(kind: SpectrumKind, n_max: int) -> float:
    """Max deviation of ``R(n̂)`` from ``U(n̂-1) U⁻¹(n̂)`` over levels ``n >= 1``."""

    from_transforms = transform_matrix(kind, n_max, -1) @ inverse_transform_matrix(kind, n_max)
    diff = (r_matrix(kind, n_max) - from_transforms).blocks[:, :, 1:, 1:]
    return float(np.max(np.abs(diff)))


def standard_annihilator(kind: SpectrumKind, n_max: int) -> ChargeFockMatrix:
    """``â = b R(n̂)`` in the standard representation."""

    b, _, _ = ladder_matrices(n_max)
    return ChargeFockMatrix.scalar(b) @ r_matrix(kind, n_max)


@dataclass(frozen=True)
class AnnihilatorCheck:
    transform_deviation: float
    even_part_deviation: float
    odd_part_norm: float


def annihilator_check(kind: SpectrumKind, n_max: int) -> AnnihilatorCheck:
    """Compare ``U(n̂) b U⁻¹(n̂)`` with ``b R(n̂)`` and its even part with ``b ε(n̂)``."""

    b, _, _ = ladder_matrices(n_max)
    moved = transform_matrix(kind, n_max) @ ChargeFockMatrix.scalar(b) @ inverse_transform_matrix(
        kind, n_max
    )
    standard = standard_annihilator(kind, n_max)
    even = standard.even_part()
    expected_even = ChargeFockMatrix.scalar(deformed_annihilator(kind, n_max))
    return AnnihilatorCheck(
        transform_deviation=(moved - standard).max_abs(),
        even_part_deviation=(even - expected_even).max_abs(),
        odd_part_norm=standard.odd_part().max_abs(),
    )


def hamiltonian_check(kind: SpectrumKind, n_max: int) -> float:
    """Max deviation of ``U H U⁻¹`` from ``τ₃ E(n̂)`` with ``H = (τ₃ + iτ₂) K + τ₃``."""

    kinetic = kind.lambda_**2 * (np.arange(n_max) + 0.5) + 0.5 * kind.p_z**2
    h_std = ChargeFockMatrix.from_pauli(i_tau2=np.diag(kinetic), tau3=np.diag(kinetic + 1.0))
    diagonal = transform_matrix(kind, n_max) @ h_std @ inverse_transform_matrix(kind, n_max)
    levels = np.diag(energy_levels(kind, n_max))
    expected = ChargeFockMatrix.from_charge_diagonals(levels, -levels, basis="nonlocal")
    return (diagonal - expected).max_abs()


def _closed_commutator_diagonal(kind: SpectrumKind, n_max: int) -> NDArray[np.float64]:
    """``ε²(n+1)(n+1) - ε²(n) n`` for ``n < n_max``."""

    eps2 = eps_array(kind, n_max + 1) ** 2
    n = np.arange(n_max + 1, dtype=float)
    weighted = eps2 * n
    return weighted[1:] - weighted[:-1]


@dataclass(frozen=True)
class CommutatorCheck:
    """Deviation of a truncated matrix commutator from its closed form."""

    interior_deviation: float
    boundary_deviation: float
    interior_size: int


def commutator_check_ladder(kind: SpectrumKind, n_max: int) -> CommutatorCheck:
    """``[[â], [â]†]`` against ``ε²(n̂+1)(n̂+1) - ε²(n̂)n̂``."""

    a = deformed_annihilator(kind, n_max)
    commutator = a @ a.T - a.T @ a
    deviation = np.abs(commutator - np.diag(_closed_commutator_diagonal(kind, n_max)))
    inner = n_max - BOUNDARY_ROWS
    return CommutatorCheck(
        interior_deviation=float(deviation[:inner, :inner].max()),
        boundary_deviation=float(deviation.max()),
        interior_size=inner,
    )


def mean_position_matrices(
    kind: SpectrumKind, n_max: int, center_dim: int = GYRATION_CENTER_DIM
) -> tuple[FockMatrix, FockMatrix]:
    """``[x̂], [ŷ]`` on (rotational mode) ⊗ (gyration-center mode).

    With ``σ = 1/λ``: ``[q] = σ(a + a†)/√2``, ``[p] = -i(a - a†)/(√2σ)`` from the
    deformed pair, and ``Q, P`` likewise from a plain ladder ``c``. Then
    ``[x] = σ²(P - [p])/√2`` and ``[y] = ([q] + Q)/√2``.
    """

    if not kind.lambda_ > 0:
        raise DomainError(f"mean-position operators need lambda > 0, got {kind.lambda_}")
    sigma = 1.0 / kind.lambda_
    a = deformed_annihilator(kind, n_max).astype(complex)
    c = _ladder(center_dim).astype(complex)
    eye_rot, eye_center = np.eye(n_max), np.eye(center_dim)
    q = np.kron(sigma * (a + a.T) / math.sqrt(2), eye_center)
    p = np.kron(-1j * (a - a.T) / (math.sqrt(2) * sigma), eye_center)
    big_q = np.kron(eye_rot, sigma * (c + c.T) / math.sqrt(2))
    big_p = np.kron(eye_rot, -1j * (c - c.T) / (math.sqrt(2) * sigma))
    return sigma**2 * (big_p - p) / math.sqrt(2), (q + big_q) / math.sqrt(2)


def commutator_check_mean_position(
    kind: SpectrumKind, n_max: int, center_dim: int = GYRATION_CENTER_DIM
) -> CommutatorCheck:
    """``[[x̂], [ŷ]]`` against ``(iσ²/2)(ε²(n̂+1)(n̂+1) - ε²(n̂)n̂ - 1)``.

    Deviations are reported in units of ``σ²`` so that the check stays
    meaningful as ``λ → 0``.
    """

    x, y = mean_position_matrices(kind, n_max, center_dim)
    sigma2 = 1.0 / kind.lambda_**2
    commutator = x @ y - y @ x
    closed = 0.5j * sigma2 * (_closed_commutator_diagonal(kind, n_max) - 1.0)
    expected = np.kron(np.diag(closed), np.eye(center_dim))
    deviation = np.abs(commutator - expected).reshape(n_max, center_dim, n_max, center_dim) / sigma2
    inner = n_max - BOUNDARY_ROWS
    inner_center = center_dim - 1
    return CommutatorCheck(
        interior_deviation=float(deviation[:inner, :inner_center, :inner, :inner_center].max()),
        boundary_deviation=float(deviation.max()),
        interior_size=inner,
    )


def eps_p_z_derivative(lambda_: float, p_z: float, n_max: int) -> NDArray[np.float64]:
    """Analytic ``∂ε(n, p_z)/∂p_z = λ² p_z (E(n-1) - E(n)) / (2 (E(n-1)E(n))^{5/2})``, zero at ``n = 0``."""

    kind = SpectrumKind.magnetic(lambda_, p_z)
    energies = energy_levels(kind, n_max)
    deriv = np.zeros(n_max)
    lo, hi = energies[:-1], energies[1:]
    gap = 2.0 * lambda_**2 / (lo + hi)
    deriv[1:] = -lambda_**2 * p_z * gap / (2.0 * (lo * hi) ** 2.5)
    return deriv


def reference_commutator_factor(lambda_: float, p_z: float, n_max: int) -> NDArray[np.float64]:
    """Reference form ``p_z (E(n) - E(n-1)) / (2 (E(n-1)E(n))^{5/2})``, zero at ``n = 0``."""

    kind = SpectrumKind.magnetic(lambda_, p_z)
    energies = energy_levels(kind, n_max)
    factor = np.zeros(n_max)
    lo, hi = energies[:-1], energies[1:]
    factor[1:] = p_z * (2.0 * lambda_**2 / (lo + hi)) / (2.0 * (lo * hi) ** 2.5)
    return factor


@dataclass(frozen=True)
class LongitudinalCheck:
    """Finite-difference ``[[ẑ], [â]]`` against the closed form."""

    max_deviation: float
    fd_error_estimate: float
    reference_ratio: float | None


def _fd_commutator(lambda_: float, p_z: float, n_max: int, step: float) -> FockMatrix:
    upper = deformed_annihilator(SpectrumKind.magnetic(lambda_, p_z + step), n_max)
    lower = deformed_annihilator(SpectrumKind.magnetic(lambda_, p_z - step), n_max)
    return 1j * (upper - lower) / (2.0 * step)


def commutator_check_longitudinal(
    lambda_: float,
    p_z_values: ArrayLike,
    n_max: int,
    step: float = 1e-3,
    tol: float = 1e-6,
) -> LongitudinalCheck:
    """Represent ``[ẑ] = i∂/∂p_z`` by central differences and compare with ``i b ∂ε/∂p_z``.

    Raises
    ------
    GridResolutionError
        When the Richardson estimate of the finite-difference error exceeds ``tol``.
    """

    b, _, _ = ladder_matrices(n_max)
    max_dev = 0.0
    fd_err = 0.0
    ratios: list[float] = []
    for p_z in np.atleast_1d(np.asarray(p_z_values, dtype=float)):
        fine = _fd_commutator(lambda_, p_z, n_max, step)
        coarse = _fd_commutator(lambda_, p_z, n_max, 2.0 * step)
        closed = 1j * b * eps_p_z_derivative(lambda_, p_z, n_max)[np.newaxis, :]
        max_dev = max(max_dev, float(np.max(np.abs(fine - closed))))
        fd_err = max(fd_err, float(np.max(np.abs(fine - coarse))) / 3.0)
        reference = reference_commutator_factor(lambda_, p_z, n_max)
        if reference[1] != 0:
            ratios.append(float(eps_p_z_derivative(lambda_, p_z, n_max)[1] / reference[1]))
    if fd_err > tol:
        raise GridResolutionError(
            f"finite-difference error {fd_err:.3g} exceeds {tol:g}; use a smaller p_z step than {step:g}"
        )
    return LongitudinalCheck(max_dev, fd_err, ratios[0] if ratios else None)


def fv_transform_free(p: ArrayLike) -> NDArray[np.float64]:
    """Pointwise ``U(p) = ((E + 1) + (E - 1) τ₁) / (2√E)``, shape ``(len(p), 2, 2)``."""

    momenta = np.atleast_1d(np.asarray(p, dtype=float))
    energies = np.hypot(1.0, momenta)
    root = 2.0 * np.sqrt(energies)
    alpha = (energies + 1.0) / root
    beta = (energies - 1.0) / root
    return alpha[:, None, None] * TAU_0 + beta[:, None, None] * TAU_1


@dataclass(frozen=True)
class FreeTransformCheck:
    max_deviation: float
    det_min: float
    det_max: float
    eigenvalues: NDArray[np.float64]


def fv_transform_free_check(p: ArrayLike) -> FreeTransformCheck:
    """Verify ``U H U⁻¹ = τ₃ E(p)`` with ``H = (τ₃ + iτ₂) p²/2 + τ₃``."""

    momenta = np.atleast_1d(np.asarray(p, dtype=float))
    u = fv_transform_free(momenta)
    kinetic = 0.5 * momenta**2
    h = kinetic[:, None, None] * (TAU_3 + I_TAU_2) + TAU_3
    diagonal = u @ h @ np.linalg.inv(u)
    expected = np.hypot(1.0, momenta)[:, None, None] * TAU_3
    dets = np.linalg.det(u)
    return FreeTransformCheck(
        max_deviation=float(np.max(np.abs(diagonal - expected))),
        det_min=float(dets.min()),
        det_max=float(dets.max()),
        eigenvalues=np.stack([diagonal[:, 0, 0], diagonal[:, 1, 1]], axis=1),
    )
