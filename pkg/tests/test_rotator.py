import math

import numpy as np
import pytest
from scipy.special import gammaln

from fvcs.config import CoherentLabel
from fvcs.errors import DomainError, GridResolutionError, TruncationError
from fvcs.rotator import (
    build_state,
    eigen_residual,
    evolve_mean_a,
    evolve_mean_a_closed,
    fig3_data,
    fig3_presets,
    fig3_tau_grid,
    fig4_data,
    low_frequency,
    low_frequency_exact,
    low_frequency_peak,
    r2_trajectory,
    radius_classical,
    radius_dispersion_direct,
    radius_stats,
    unity_moments,
    verify_weight,
)
from fvcs.spectrum import SpectrumKind

N_MAX = 64


def test_vacuum_state():
    state = build_state(CoherentLabel(0.0), 1.0, N_MAX)

    assert state.coeffs[0] == 1.0
    assert state.probabilities[1:].sum() == 0.0
    assert state.tail == 0.0


def test_state_is_normalised():
    state = build_state(CoherentLabel(1.0 + 1.0j), 1.0, N_MAX)

    assert math.fsum(state.probabilities) == pytest.approx(1.0, abs=1e-12)
    assert state.tail < 1e-14
    assert state.n_max == N_MAX


def test_state_is_an_eigenvector_of_the_deformed_annihilator():
    state = build_state(CoherentLabel(1.5 - 0.5j), 1.0, N_MAX)

    assert eigen_residual(state) < 1e-10


def test_small_lambda_gives_glauber_coefficients():
    alpha = 1.2 + 0.4j
    n = np.arange(32)
    glauber = np.exp(-abs(alpha) ** 2 / 2 + n * np.log(alpha) - 0.5 * gammaln(n + 1))

    state = build_state(CoherentLabel(alpha), 1e-6, 32)

    np.testing.assert_allclose(state.coeffs, glauber, atol=1e-9)


def test_truncation_error_suggests_a_larger_basis():
    with pytest.raises(TruncationError, match="use n_max >=") as info:
        build_state(CoherentLabel(5.0), 1.0, 16)

    assert info.value.suggested_n_max > 16
    assert info.value.suggested_n_max % 16 == 0


def test_mean_amplitude_starts_at_alpha():
    alpha = 0.8 + 0.3j

    state = build_state(CoherentLabel(alpha), 1.0, N_MAX)

    assert evolve_mean_a(state, [0.0])[0] == pytest.approx(alpha, abs=1e-12)
    assert evolve_mean_a_closed(CoherentLabel(alpha), 1.0, 0.0)[0] == pytest.approx(alpha)


def test_mean_amplitude_sign_follows_charge():
    state = build_state(CoherentLabel(0.5, charge=-1), 1.0, N_MAX)

    assert evolve_mean_a(state, [0.0])[0] == pytest.approx(-0.5, abs=1e-12)


def test_mean_amplitude_is_harmonic_for_small_lambda():
    alpha = 1.0 + 0.5j
    tau = np.linspace(0.0, 2.0 * math.pi, 50)

    values = evolve_mean_a(build_state(CoherentLabel(alpha), 1e-4, N_MAX), tau)

    np.testing.assert_allclose(values, alpha * np.exp(-1j * tau), atol=1e-6)


def test_low_frequency_limits():
    assert low_frequency(0.3) == pytest.approx(0.09)
    assert low_frequency_exact(SpectrumKind.rotator(0.01)) == pytest.approx(1e-4, rel=1e-2)


def test_low_frequency_peak_locates_a_cosine():
    tau = np.linspace(0.0, 20 * 2.0 * math.pi / 0.3, 8192, endpoint=False)

    peak, resolution = low_frequency_peak(np.cos(0.3 * tau), tau)

    assert abs(peak - 0.3) <= resolution


def test_closed_form_modulation_has_the_low_frequency():
    lam = 0.3
    tau = np.linspace(0.0, 20 * 2.0 * math.pi / low_frequency(lam), 8192, endpoint=False)

    peak, resolution = low_frequency_peak(np.abs(evolve_mean_a_closed(CoherentLabel(1.0), lam, tau)), tau)

    assert abs(peak - low_frequency(lam)) <= resolution


def test_r2_is_conserved():
    state = build_state(CoherentLabel(0.5 + 0.5j), 1.0, N_MAX)

    trajectory = r2_trajectory(state, np.linspace(0.0, 50.0, 101))

    assert trajectory.max() - trajectory.min() < 1e-12
    assert trajectory[0] == pytest.approx(1.0 + 2.0 * np.sum(np.arange(N_MAX) * state.probabilities))


def test_radius_stats_vacuum_and_nonlocal():
    assert radius_stats(SpectrumKind.rotator(1.0), 0.0).dispersion == 1.0

    stats = radius_stats(SpectrumKind.rotator(1.0, deformed=False), 2.0)

    assert stats.r2_mean == 4.0
    assert stats.dispersion == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("lam", [0.5, 1.0, 3.0])
def test_radius_dispersion_paths_agree(lam):
    label = CoherentLabel(0.5 + 0.5j)

    direct = radius_dispersion_direct(build_state(label, lam, N_MAX))

    assert direct == pytest.approx(radius_stats(SpectrumKind.rotator(lam), label.abs2).dispersion, abs=1e-10)


def test_radius_classical():
    assert radius_classical(CoherentLabel(3.0 + 4.0j)) == pytest.approx(5.0 * math.sqrt(2.0))


def test_unity_moments():
    np.testing.assert_allclose(unity_moments(SpectrumKind.rotator(0.0), [0, 3, 5]), [1.0, 6.0, 120.0])
    with pytest.raises(DomainError):
        unity_moments(SpectrumKind.rotator(1.0), [-1])


def test_exponential_weight_reproduces_factorials():
    x = np.linspace(0.0, 200.0, 20001)

    check = verify_weight(np.exp(-x), x, SpectrumKind.rotator(0.0), 15)

    assert check.max_rel_error < 1e-8


def test_short_grid_is_rejected():
    x = np.linspace(0.0, 5.0, 501)

    with pytest.raises(GridResolutionError, match="longer grid"):
        verify_weight(np.exp(-x), x, SpectrumKind.rotator(0.0), 5)


def test_negative_weight_warns():
    x = np.linspace(0.0, 200.0, 2001)
    weight = np.exp(-x)
    weight[10] = -1e-3

    with pytest.warns(RuntimeWarning, match="negative"):
        verify_weight(weight, x, SpectrumKind.rotator(0.0), 2)


def test_fig3_presets():
    assert set(fig3_presets()) == {"a", "b", "c", "d"}


def test_fig3_table_starts_at_the_classical_radius():
    table = fig3_data(0.1, 0.5 + 0.5j, [0.0, 1.0])

    assert table.columns == ["tau", "classical", "nonlocal", "standard"]
    assert table.column("standard")[0] == pytest.approx(table.column("classical")[0], abs=1e-10)
    assert table.column("nonlocal")[0] == pytest.approx(table.column("classical")[0], abs=1e-10)


def test_fig3_strong_deformation_separates_standard_from_nonlocal():
    lam, q_mean, p_mean = fig3_presets()["b"]
    alpha = complex(q_mean, p_mean) / math.sqrt(2.0)

    table = fig3_data(lam, alpha, fig3_tau_grid(lam))

    gap = np.abs(np.array(table.column("standard")) - np.array(table.column("nonlocal")))
    assert gap.max() > 1e-3


def test_radius_dispersion_departs_from_one_under_strong_deformation():
    stats = radius_stats(SpectrumKind.rotator(8.0), 8.0)

    assert stats.dispersion == pytest.approx(0.98145, abs=1e-4)
    assert abs(stats.dispersion - 1.0) > 1e-3


def test_fig4_zero_radius_matches_nonlocal():
    table = fig4_data([0.01, 1.0], [0.0, 1.0], threads=1)

    assert table.ok
    assert table.column("dr2_R_0") == pytest.approx(table.column("nonlocal"), rel=1e-12)
    assert table.column("nonlocal") == pytest.approx([100.0, 1.0])
