import math

import mpmath
import numpy as np
import pytest

from fvcs.config import CoherentLabel, PhysicalParams
from fvcs.errors import DomainError
from fvcs.free_particle import effective_mass
from fvcs.magnetic import (
    build_magnetic_state,
    crossover_time,
    envelope_deviation,
    evolve_mean_ar,
    longitudinal_amplitudes,
    marginals,
    mean_vz,
    mean_vz_value,
    mixed_eigen_residual,
    state_norm,
)
from fvcs.rotator import evolve_mean_a_closed

PARAMS = PhysicalParams(lambda_r=0.5, lambda_z=0.2, n_max=48)


def test_longitudinal_amplitudes_are_normalised():
    p, amplitudes = longitudinal_amplitudes(0.3 + 1.0j, nodes=24)

    assert len(p) == 24
    assert math.fsum(np.abs(amplitudes) ** 2) == pytest.approx(1.0, rel=1e-12)
    assert p.mean() == pytest.approx(math.sqrt(2.0), abs=1e-12)


@pytest.mark.parametrize("variant", ["translational", "product", "mixed"])
def test_states_are_normalised(variant):
    state = build_magnetic_state(variant, PARAMS, 0.5 + 0.5j, 0.2 + 0.4j, level=3, nodes=8)

    assert state_norm(state) == pytest.approx(1.0, abs=1e-12)
    assert state.coeffs.shape == (48, 8)


def test_fixed_momentum_state_has_no_finite_norm():
    state = build_magnetic_state("rotational", PARAMS, 0.5, p_z=0.3)

    assert state.delta_normalized
    assert state.p_z_nodes.tolist() == [0.3]
    with pytest.raises(DomainError, match="delta function"):
        state_norm(state)


def test_translational_level_must_fit_the_basis():
    with pytest.raises(DomainError, match="level must lie"):
        build_magnetic_state("translational", PARAMS, level=48)


def test_unknown_variant():
    with pytest.raises(DomainError, match="unknown magnetic state variant"):
        build_magnetic_state("helical", PARAMS)  # type: ignore[arg-type]


def test_product_state_marginals():
    state = build_magnetic_state("product", PARAMS, 0.7, 0.5j, nodes=8)

    levels, nodes = marginals(state)
    n = np.arange(48)
    poisson = np.exp(-0.49) * 0.49**n / np.array([math.factorial(k) for k in n], dtype=float)

    np.testing.assert_allclose(levels, poisson, atol=1e-14)
    assert nodes.sum() == pytest.approx(1.0, abs=1e-12)


def test_translational_marginal_is_a_single_level():
    levels, _ = marginals(build_magnetic_state("translational", PARAMS, level=2, nodes=8))

    assert levels[2] == pytest.approx(1.0, abs=1e-12)
    assert levels.sum() == pytest.approx(levels[2])


def test_mixed_state_fibers_are_deformed_eigenvectors():
    state = build_magnetic_state("mixed", PARAMS, 0.5 + 0.5j, 0.5j, nodes=8)

    assert mixed_eigen_residual(state) < 1e-10


def test_translational_state_has_no_rotational_label():
    state = build_magnetic_state("translational", PARAMS, nodes=8)

    with pytest.raises(DomainError):
        mixed_eigen_residual(state)


def test_mean_amplitude_reduces_without_longitudinal_spread():
    label = CoherentLabel(0.5 + 0.5j)
    tau = np.linspace(0.0, 10.0, 41)

    with_z = evolve_mean_ar(label, 1.0j, 0.5, 1e-8, tau)

    np.testing.assert_allclose(with_z, evolve_mean_a_closed(label, 0.5, tau), atol=1e-12)


def test_envelope_deviation_starts_at_zero():
    assert envelope_deviation(1.0j, 0.5, 0.1, [0.0])[0] == pytest.approx(0.0, abs=1e-15)


def test_crossover_time_scales_inversely_with_lambda_z():
    coarse = crossover_time(1.0j, 1.0, 0.1)
    fine = crossover_time(1.0j, 1.0, 0.05)

    assert coarse == pytest.approx(1.0, rel=0.05)
    assert coarse / fine == pytest.approx(0.5, rel=0.05)


def test_crossover_time_needs_longitudinal_localisation():
    with pytest.raises(DomainError):
        crossover_time(1.0j, 1.0, 0.0)


def test_mean_vz_value():
    assert mean_vz_value(0.3, 1.0, 1e-6, 0.0) == pytest.approx(0.3, rel=1e-10)
    assert mean_vz_value(1.0, 1.5, 0.0, 0.1) == pytest.approx(0.8)
    assert mean_vz_value(2.0, 0.0, 0.5, 0.0) == pytest.approx(2.0 / effective_mass(0.5))


def test_mean_vz_of_a_product_state():
    params = PARAMS.with_changes(omega=0.05)
    state = build_magnetic_state("product", params, 1.0, 1.0j, nodes=8)

    expected = state.p_z_mean * (1.0 / effective_mass(0.2) - 0.05 * 1.5)

    assert state.p_z_mean == pytest.approx(math.sqrt(2.0) * 0.2)
    assert mean_vz(state, params) == pytest.approx(expected)


def test_mean_vz_frozen_value():
    inverse_mass = 2 / mpmath.sqrt(mpmath.pi) * mpmath.quad(
        lambda p: p**2 * mpmath.exp(-(p**2)) / mpmath.sqrt(1 + mpmath.mpf("0.04") * p**2),
        [-mpmath.inf, 0, mpmath.inf],
    )

    value = mean_vz_value(1.0, 2.0, 0.2, 0.1)

    assert value == pytest.approx(0.72202219, abs=1e-7)
    assert value == pytest.approx(float(inverse_mass - mpmath.mpf("0.25")), rel=1e-10)


def test_mean_vz_frozen_value_through_a_product_state():
    params = PARAMS.with_changes(lambda_z=0.2, omega=0.1)
    state = build_magnetic_state("product", params, math.sqrt(2.0), 1.0j / (0.2 * math.sqrt(2.0)))

    assert state.p_z_mean == pytest.approx(1.0)
    assert mean_vz(state, params) == pytest.approx(mean_vz_value(1.0, 2.0, 0.2, 0.1), rel=1e-12)


def test_mixed_state_reduces_to_product_without_deformation():
    params = PARAMS.with_changes(lambda_r=1e-8)

    mixed = build_magnetic_state("mixed", params, 0.5 + 0.5j, 0.2 + 0.4j, nodes=8)
    product = build_magnetic_state("product", params, 0.5 + 0.5j, 0.2 + 0.4j, nodes=8)

    np.testing.assert_allclose(mixed.coeffs, product.coeffs, atol=1e-8)
