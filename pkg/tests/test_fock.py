import numpy as np
import pytest

from fvcs.errors import DomainError
from fvcs.fock import (
    BOUNDARY_ROWS,
    ChargeFockMatrix,
    annihilator_check,
    commutator_check_ladder,
    commutator_check_longitudinal,
    commutator_check_mean_position,
    deformed_annihilator,
    fv_transform_free,
    fv_transform_free_check,
    hamiltonian_check,
    inverse_transform_matrix,
    ladder_matrices,
    r_matrix_check,
    transform_matrix,
)
from fvcs.spectrum import SpectrumKind, eps_array

N_MAX = 32


def test_ladder_commutator_is_identity_below_the_cutoff():
    b, bd, n = ladder_matrices(N_MAX)

    commutator = b @ bd - bd @ b

    np.testing.assert_allclose(np.diag(commutator)[:-1], 1.0, atol=1e-12)
    np.testing.assert_allclose(bd @ b, n, atol=1e-12)


def test_ladder_matrices_enforce_minimum_size():
    with pytest.raises(DomainError, match="n_max below minimum"):
        ladder_matrices(8)


def test_pauli_algebra():
    eye = np.eye(3)
    tau1 = ChargeFockMatrix.from_pauli(tau1=eye)
    i_tau2 = ChargeFockMatrix.from_pauli(i_tau2=eye)
    one = ChargeFockMatrix.scalar(eye)

    assert (tau1 @ tau1 - one).max_abs() == 0.0
    assert (i_tau2 @ i_tau2 + one).max_abs() == 0.0
    assert tau1.to_dense().shape == (6, 6)


def test_charge_diagonals_match_pauli_form():
    upper = np.diag([1.0, 2.0, 3.0])
    lower = 2.0 * np.eye(3)

    matrix = ChargeFockMatrix.from_charge_diagonals(upper, lower)
    pauli = ChargeFockMatrix.from_pauli(identity=(upper + lower) / 2, tau3=(upper - lower) / 2)

    assert (matrix - pauli).max_abs() == 0.0
    assert not matrix.odd_part().blocks.any()
    with pytest.raises(DomainError, match="differ in shape"):
        ChargeFockMatrix.from_charge_diagonals(np.eye(2), np.eye(3))


def test_even_and_odd_parts_split_the_matrix():
    rng = np.random.default_rng(7)
    matrix = ChargeFockMatrix(rng.normal(size=(2, 2, 4, 4)))

    assert (matrix.even_part() + matrix.odd_part() - matrix).max_abs() == 0.0
    assert not matrix.even_part().blocks[0, 1].any()
    assert (matrix.adjoint().adjoint() - matrix).max_abs() == 0.0


def test_charge_matrix_validation():
    with pytest.raises(DomainError, match="shape"):
        ChargeFockMatrix(np.zeros((2, 3, 4, 4)))
    with pytest.raises(DomainError, match="finite"):
        ChargeFockMatrix(np.full((2, 2, 2, 2), np.nan))
    with pytest.raises(DomainError, match="Fock dimensions differ"):
        ChargeFockMatrix.scalar(np.eye(2)) @ ChargeFockMatrix.scalar(np.eye(3))


def test_deformed_annihilator_entries():
    kind = SpectrumKind.rotator(1.0)

    a = deformed_annihilator(kind, N_MAX)

    assert a[4, 5] == pytest.approx(np.sqrt(5.0) * eps_array(kind, N_MAX)[5])
    assert np.count_nonzero(a) == N_MAX - 1


def test_transform_has_unit_determinant():
    kind = SpectrumKind.rotator(2.0)

    product = transform_matrix(kind, N_MAX) @ inverse_transform_matrix(kind, N_MAX)

    assert (product - ChargeFockMatrix.scalar(np.eye(N_MAX))).max_abs() < 1e-12


@pytest.mark.parametrize("lam", [0.1, 1.0, 8.0])
def test_commutator_of_deformed_ladder(lam):
    check = commutator_check_ladder(SpectrumKind.rotator(lam), N_MAX)

    assert check.interior_deviation < 1e-10
    assert check.interior_size == N_MAX - BOUNDARY_ROWS
    assert check.boundary_deviation > check.interior_deviation


@pytest.mark.parametrize("lam", [0.1, 1.0])
def test_commutator_of_mean_position(lam):
    check = commutator_check_mean_position(SpectrumKind.rotator(lam), N_MAX)

    assert check.interior_deviation < 1e-10


def test_r_matrix_from_transforms():
    assert r_matrix_check(SpectrumKind.rotator(1.0), N_MAX) < 1e-12


def test_annihilator_transform():
    check = annihilator_check(SpectrumKind.rotator(1.0), N_MAX)

    assert check.transform_deviation < 1e-10
    assert check.even_part_deviation < 1e-12
    assert check.odd_part_norm > 0.0


def test_undeformed_annihilator_has_no_odd_part():
    check = annihilator_check(SpectrumKind.rotator(1.0, deformed=False), N_MAX)

    assert check.odd_part_norm == 0.0


def test_hamiltonian_is_diagonalised():
    assert hamiltonian_check(SpectrumKind.rotator(1.0), N_MAX) < 1e-10
    assert hamiltonian_check(SpectrumKind.magnetic(0.5, 1.0), N_MAX) < 1e-10


def test_longitudinal_commutator():
    check = commutator_check_longitudinal(0.5, [0.25, 0.5, 1.0], 16)

    assert check.max_deviation < 1e-6
    assert check.fd_error_estimate < 1e-6
    assert check.reference_ratio == pytest.approx(-0.25)


def test_longitudinal_commutator_vanishes_at_zero_momentum():
    check = commutator_check_longitudinal(1.0, [0.0], 16)

    assert check.max_deviation == 0.0
    assert check.reference_ratio is None


def test_free_transform():
    check = fv_transform_free_check(np.linspace(-10.0, 10.0, 101))

    assert check.max_deviation < 1e-10
    assert check.det_min == pytest.approx(1.0, abs=1e-12)
    assert check.det_max == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(check.eigenvalues[:, 0], -check.eigenvalues[:, 1], atol=1e-10)


def test_free_transform_is_identity_at_rest():
    np.testing.assert_allclose(fv_transform_free(0.0)[0], np.eye(2))


def test_mean_position_needs_positive_lambda():
    with pytest.raises(DomainError, match="lambda > 0"):
        commutator_check_mean_position(SpectrumKind.rotator(0.0), N_MAX)
