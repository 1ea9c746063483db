import math

import numpy as np
import pytest

from fvcs.config import CoherentLabel
from fvcs.errors import DivergenceError, DomainError
from fvcs.free_particle import (
    FreeState,
    classical_velocity,
    coord_dispersion,
    effective_mass,
    effective_mass_series,
    fig1_data,
    fig2_data,
    mean_velocity_quad,
    mean_velocity_series,
    momentum_dispersion,
    state_norm,
    velocity_slope,
    wavefunction,
)


def _state(alpha, lam, charge=1):
    return FreeState(CoherentLabel(alpha, charge=charge), lam)


@pytest.mark.parametrize("charge", [1, -1])
def test_state_is_normalised(charge):
    assert state_norm(_state(0.3 + 1.2j, 0.5, charge)).value == pytest.approx(1.0, abs=1e-12)


def test_wavefunction_occupies_one_charge_component():
    psi = wavefunction(_state(1.0j, 0.5, charge=-1), [0.0, 1.0])

    assert psi.shape == (2, 2)
    assert not psi[0].any()


def test_state_rejects_non_positive_lambda():
    with pytest.raises(DomainError):
        FreeState(CoherentLabel(0.0), 0.0)


def test_from_momentum_sets_mean_momentum():
    state = FreeState.from_momentum(3.0, 0.5)

    assert state.p_mean == pytest.approx(3.0)
    assert state.center == pytest.approx(6.0)


def test_velocity_vanishes_at_rest():
    assert mean_velocity_quad(_state(0.0, 1.0)).value == pytest.approx(0.0, abs=1e-12)
    assert mean_velocity_series(_state(0.7, 0.1)).value == 0.0


def test_velocity_is_nonrelativistic_for_small_lambda():
    lam = 1e-4

    result = mean_velocity_quad(_state(1.0j, lam))

    assert result.value == pytest.approx(math.sqrt(2.0) * lam, rel=1e-7)


def test_velocity_approaches_classical_for_sharp_momentum():
    state = FreeState.from_momentum(50.0, 0.01)

    assert mean_velocity_quad(state).value == pytest.approx(classical_velocity(50.0), abs=1e-8)


@pytest.mark.parametrize(("lam", "alpha_im"), [(0.05, 1.0), (0.1, 0.5), (0.1, 2.0)])
def test_series_agrees_with_quadrature(lam, alpha_im):
    state = _state(complex(0.0, alpha_im), lam)

    series = mean_velocity_series(state)

    assert series.method == "series"
    assert series.value == pytest.approx(mean_velocity_quad(state).value, abs=1e-9)


def test_series_refuses_large_lambda():
    with pytest.raises(DivergenceError, match="use the quadrature path"):
        mean_velocity_series(_state(0.25j, 0.5))


def test_linear_terms_give_momentum_over_effective_mass():
    state = _state(0.5j, 0.2)

    result = mean_velocity_series(state, linear_only=True)

    assert result.value == pytest.approx(state.p_mean / effective_mass(0.2), rel=1e-10)


def test_effective_mass_grows_with_lambda():
    masses = [effective_mass(lam) for lam in (0.0, 0.1, 0.5, 1.0, 4.0)]

    assert masses[0] == 1.0
    assert all(b > a for a, b in zip(masses, masses[1:]))


def test_effective_mass_series_matches_quadrature():
    assert effective_mass_series(0.1) == pytest.approx(effective_mass(0.1), rel=1e-12)
    assert effective_mass_series(0.0) == 1.0


def test_effective_mass_series_diverges_for_large_lambda():
    with pytest.raises(DivergenceError, match="effective-mass series diverges"):
        effective_mass_series(1.0)


def test_effective_mass_rejects_negative_lambda():
    with pytest.raises(DomainError):
        effective_mass(-0.1)


@pytest.mark.parametrize("lam", [0.1, 0.3, 1.0])
def test_velocity_slope_is_inverse_effective_mass(lam):
    assert velocity_slope(lam) == pytest.approx(1.0 / effective_mass(lam), rel=1e-6)


def test_coord_dispersion_limit_and_sign():
    assert coord_dispersion(_state(0.0, 1e-3)).value == pytest.approx(0.5, abs=1e-9)
    assert coord_dispersion(_state(0.0, 8.0)).value < 0.0


def test_coord_dispersion_shrinks_with_lambda():
    values = [coord_dispersion(_state(0.0, lam)).value for lam in (0.5, 1.0, 2.0)]

    assert values[0] > values[1] > values[2]


def test_momentum_dispersion():
    assert momentum_dispersion(_state(1.0 + 1.0j, 0.4)).value == pytest.approx(0.08, rel=1e-10)


def test_classical_velocity():
    assert classical_velocity(0.0) == 0.0
    assert classical_velocity(1.0) == pytest.approx(1.0 / math.sqrt(2.0))


def test_fig1_table():
    table = fig1_data([0.5], [0.0, 1.0], threads=1)

    assert table.columns == ["p_mean_mc", "classical", "v_lambda_0.5"]
    assert table.ok
    assert table.column("classical")[1] == pytest.approx(1.0 / math.sqrt(2.0))
    assert table.column("v_lambda_0.5")[0] == pytest.approx(0.0, abs=1e-14)
    assert 0.0 < table.column("v_lambda_0.5")[1] < table.column("classical")[1]


def test_fig2_table():
    table = fig2_data([0.0], np.array([0.1, 10.0]), threads=1)

    assert table.columns == ["dp_mc", "reference", "dq2_alpha_0", "dq_alpha_0"]
    assert table.column("reference") == pytest.approx([5.0, 0.05])
    assert table.column("dq2_alpha_0")[0] == pytest.approx(0.5, abs=1e-3)
    assert math.isnan(table.column("dq_alpha_0")[1])
