import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fvcs.errors import DomainError
from fvcs.spectrum import (
    LIMIT_COEFFICIENT,
    SpectrumKind,
    chi_array,
    energy,
    energy_levels,
    eps_array,
    eps_asymptote_check,
    eps_bracket,
    eps_chi,
    eps_factorial,
    eps_minus_one_table,
    eps_squared_factorial,
    eps_two_arg,
    eps_two_arg_matrix,
    log_eps_factorial_table,
    normalization,
)

mpmath.mp.dps = 40


def _mp_energy(lam, n, p_z=0):
    return mpmath.sqrt(1 + 2 * mpmath.mpf(lam) ** 2 * (n + mpmath.mpf("0.5")) + mpmath.mpf(p_z) ** 2)


def _mp_eps(lam, n, p_z=0):
    lo, hi = _mp_energy(lam, n - 1, p_z), _mp_energy(lam, n, p_z)
    return (lo + hi) / (2 * mpmath.sqrt(lo * hi))


def test_energy_free_and_discrete():
    assert energy(SpectrumKind.free(0.5), 3.0) == pytest.approx(math.sqrt(10.0))
    assert energy(SpectrumKind.rotator(1.0), 2) == pytest.approx(math.sqrt(6.0))
    assert energy(SpectrumKind.magnetic(1.0, 2.0), 0) == pytest.approx(math.sqrt(6.0))


def test_energy_rejects_negative_level():
    with pytest.raises(DomainError):
        energy(SpectrumKind.rotator(1.0), -1)


def test_energy_levels_square_spacing_is_exact():
    levels = energy_levels(SpectrumKind.rotator(0.7), 50)

    np.testing.assert_allclose(np.diff(levels**2), 2 * 0.7**2, rtol=1e-12)


def test_spectrum_kind_validation():
    with pytest.raises(DomainError):
        SpectrumKind("harmonic", 1.0)
    with pytest.raises(DomainError):
        SpectrumKind.rotator(-1.0)
    with pytest.raises(DomainError, match="p_z only applies"):
        SpectrumKind("rotator", 1.0, p_z=1.0)


def test_free_spectrum_has_no_eps_factors():
    with pytest.raises(DomainError, match="continuous"):
        eps_chi(SpectrumKind.free(1.0), 1)


def test_eps_requires_positive_level():
    with pytest.raises(DomainError):
        eps_chi(SpectrumKind.rotator(1.0), 0)


@pytest.mark.parametrize(("lam", "n"), [(1e-4, 1), (1e-4, 500), (0.1, 3), (1.0, 1), (8.0, 10), (8.0, 1000)])
def test_eps_minus_one_matches_mpmath(lam, n):
    eps_m1, chi = eps_minus_one_table(SpectrumKind.rotator(lam), [n])
    expected = _mp_eps(lam, n) - 1
    lo, hi = _mp_energy(lam, n - 1), _mp_energy(lam, n)
    expected_chi = (lo - hi) / (2 * mpmath.sqrt(lo * hi))

    assert eps_m1[0] == pytest.approx(float(expected), rel=1e-10)
    assert chi[0] == pytest.approx(float(expected_chi), rel=1e-10)


def test_magnetic_eps_matches_mpmath():
    eps_m1, _ = eps_minus_one_table(SpectrumKind.magnetic(0.5, 1.5), [4])

    assert eps_m1[0] == pytest.approx(float(_mp_eps(0.5, 4, 1.5) - 1), rel=1e-10)


@settings(max_examples=200)
@given(
    lam=st.floats(min_value=1e-3, max_value=10.0),
    n=st.integers(min_value=1, max_value=10_000),
    kind=st.sampled_from(["rotator", "magnetic"]),
)
def test_eps_chi_identity(lam, n, kind):
    spectrum = SpectrumKind.rotator(lam) if kind == "rotator" else SpectrumKind.magnetic(lam, 0.8)

    result = eps_chi(spectrum, n)

    assert abs(result.identity_residual) < 1e-12
    assert result.eps >= 1.0
    assert result.chi <= 0.0


def test_undeformed_kind_keeps_energies_and_drops_factors():
    kind = SpectrumKind.rotator(2.0, deformed=False)

    np.testing.assert_array_equal(eps_array(kind, 20), np.ones(20))
    np.testing.assert_array_equal(chi_array(kind, 20), np.zeros(20))
    np.testing.assert_allclose(energy_levels(kind, 20), energy_levels(SpectrumKind.rotator(2.0), 20))


def test_eps_array_conventions():
    kind = SpectrumKind.rotator(1.0)

    eps = eps_array(kind, 5)
    chi = chi_array(kind, 5)

    assert eps[0] == 1.0
    assert chi[0] == 0.0
    assert eps[3] == pytest.approx(eps_chi(kind, 3).eps)


def test_eps_factorials():
    kind = SpectrumKind.rotator(1.0)
    product = math.prod(eps_chi(kind, k).eps for k in range(1, 8))

    assert eps_factorial(kind, 0) == 1.0
    assert eps_factorial(kind, 7) == pytest.approx(product, rel=1e-13)
    assert eps_squared_factorial(kind, 7) == pytest.approx(product**2, rel=1e-13)
    assert log_eps_factorial_table(kind, 7)[7] == pytest.approx(math.log(product), rel=1e-13)


def test_eps_two_arg_is_symmetric_with_unit_diagonal():
    kind = SpectrumKind.rotator(1.5)

    matrix = eps_two_arg_matrix(kind, 12)

    np.testing.assert_array_equal(np.diag(matrix), np.ones(12))
    np.testing.assert_allclose(matrix, matrix.T)
    assert eps_two_arg(kind, 3, 7) == pytest.approx(matrix[3, 7])
    assert eps_two_arg(kind, 4, 5) == pytest.approx(eps_chi(kind, 5).eps)


def test_eps_two_arg_matches_mpmath():
    lo, hi = _mp_energy(2.0, 2), _mp_energy(2.0, 9)
    expected = (lo + hi) / (2 * mpmath.sqrt(lo * hi))

    assert eps_two_arg(SpectrumKind.rotator(2.0), 9, 2) == pytest.approx(float(expected), rel=1e-13)


@pytest.mark.parametrize("lam", [1.0, 8.0])
def test_asymptote_approaches_one_over_32(lam):
    check = eps_asymptote_check(lam, 1000)

    assert check.measured_coefficient == pytest.approx(LIMIT_COEFFICIENT, rel=1e-2)
    assert check.reference_coefficient == pytest.approx((5 * lam**4 + 3) / (128 * lam**4))


def test_asymptote_residual_shrinks_faster_than_leading_term():
    coarse = eps_asymptote_check(1.0, 500)
    fine = eps_asymptote_check(1.0, 1000)

    assert abs(fine.limit_residual) < abs(coarse.limit_residual) / 6


def test_asymptote_check_needs_large_level():
    with pytest.raises(DomainError):
        eps_asymptote_check(1.0, 5)


def test_eps_bracket_contains_factorial():
    bracket = eps_bracket(SpectrumKind.rotator(1.0), 2000)

    assert 0 < bracket.a < bracket.b
    assert bracket.lower_limit < bracket.upper_limit
    assert bracket.factorial_at_n_max <= bracket.upper_limit
    assert bracket.factorial_at_n_max >= math.exp(bracket.a)


def test_normalization_vacuum_and_undeformed():
    assert normalization(SpectrumKind.rotator(1.0), 0.0).value == 1.0

    result = normalization(SpectrumKind.rotator(1.0, deformed=False), 3.0)

    assert result.value == pytest.approx(math.exp(3.0), rel=1e-13)


def test_normalization_matches_mpmath_sum():
    lam, x = 1.0, 2.0
    total = mpmath.mpf(0)
    factorial = mpmath.mpf(1)
    for n in range(80):
        if n:
            factorial *= _mp_eps(lam, n) ** 2
        total += mpmath.mpf(x) ** n / (mpmath.factorial(n) * factorial)

    result = normalization(SpectrumKind.rotator(lam), x)

    assert result.value == pytest.approx(float(total), rel=1e-13)
    assert result.method == "series"


def test_normalization_rejects_negative_argument():
    with pytest.raises(DomainError):
        normalization(SpectrumKind.rotator(1.0), -1.0)


def test_normalization_with_large_argument_matches_mpmath_sum():
    lam, x = 1.0, 80.0
    total = mpmath.mpf(0)
    factorial = mpmath.mpf(1)
    for n in range(300):
        if n:
            factorial *= _mp_eps(lam, n) ** 2
        total += mpmath.mpf(x) ** n / (mpmath.factorial(n) * factorial)

    result = normalization(SpectrumKind.rotator(lam), x)

    assert result.value == pytest.approx(float(total), rel=1e-12)


def test_normalization_rejects_arguments_that_overflow():
    with pytest.raises(DomainError, match="700"):
        normalization(SpectrumKind.rotator(1.0), 800.0)
