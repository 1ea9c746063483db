"""Nonlinear coherent states of the relativistic rotator.

Time is the dimensionless ``τ = ωt``. The magnetic length ties the rotator
frequency to the localisation, ``ħω = λ² mc²``, so level ``n`` acquires the
phase ``E(n) τ / λ²`` and the spacing enters as
``(E(n+1) - E(n)) / λ² = 2 / (E(n) + E(n+1))``.

Coefficients are ``c_n = α^n / (√n! [ε(n)]!) / √N(|α|²)``. Building the same
state from an undeformed :class:`~fvcs.spectrum.SpectrumKind` gives the
nonlocal-theory baseline with identical energies.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.integrate import simpson
from scipy.special import gammaln

from .config import CoherentLabel, EvalResult
from .errors import DomainError, GridResolutionError, TruncationError
from .fock import deformed_annihilator
from .numerics import SeriesSpec, parallel_map, sum_series
from .output import Table
from .spectrum import SpectrumKind, energy_levels, eps_minus_one_table, log_eps_factorial_table, normalization

TAIL_LIMIT = 1e-14
NORM_TOLERANCE = 1e-12


@dataclass(frozen=True)
class RotatorState:
    """Normalised coefficient vector over levels ``0 .. n_max - 1``."""

    label: CoherentLabel
    kind: SpectrumKind
    coeffs: NDArray[np.complex128] = field(repr=False)
    norm: EvalResult
    tail: float

    @property
    def lambda_(self) -> float:
        return self.kind.lambda_

    @property
    def n_max(self) -> int:
        return len(self.coeffs)

    @property
    def probabilities(self) -> NDArray[np.float64]:
        return np.abs(self.coeffs) ** 2


def _log_abs_psi(kind: SpectrumKind, abs2: float, size: int) -> NDArray[np.float64]:
    """``log |α^n / (√n! [ε(n)]!)|`` for ``n < size``."""

    n = np.arange(size)
    log_fact = log_eps_factorial_table(kind, size - 1)
    return 0.5 * n * math.log(abs2) - 0.5 * gammaln(n + 1) - log_fact


def _tail_after(log_abs2_psi: NDArray[np.float64], kind: SpectrumKind, abs2: float, start: int) -> float:
    """Geometric bound on ``Σ_{n >= start} |ψ_n|²`` from the term ratio at ``start``."""

    eps_m1 = eps_minus_one_table(kind, [start + 1])[0][0]
    ratio = abs2 / ((start + 1) * (1.0 + eps_m1) ** 2)
    if ratio >= 1:
        return math.inf
    return math.exp(log_abs2_psi[start]) / (1.0 - ratio)


def _suggest_n_max(kind: SpectrumKind, abs2: float, log_norm: float, n_max: int) -> int:
    size = max(4 * n_max, int(4 * abs2) + 256)
    log_abs2 = 2.0 * _log_abs_psi(kind, abs2, size + 1) - log_norm
    for m in range(n_max, size):
        if _tail_after(log_abs2, kind, abs2, m) < TAIL_LIMIT:
            return 16 * math.ceil(m / 16)
    return 16 * math.ceil(size / 16)


def build_state(
    label: CoherentLabel,
    lambda_: float,
    n_max: int,
    deformed: bool = True,
    tol: float = 1e-14,
) -> RotatorState:
    """Coherent state of the deformed annihilator ``b ε(n̂)``.

    Raises
    ------
    TruncationError
        When the discarded tail exceeds ``1e-14``; carries a suggested ``n_max``.
    """

    return build_state_for_kind(label, SpectrumKind.rotator(lambda_, deformed), n_max, tol)


def build_state_for_kind(
    label: CoherentLabel, kind: SpectrumKind, n_max: int, tol: float = 1e-14
) -> RotatorState:
    """Same as :func:`build_state` for any discrete spectrum (e.g. a magnetic fiber at fixed ``p_z``)."""

    abs2 = label.abs2
    coeffs = np.zeros(n_max, dtype=complex)
    if abs2 == 0:
        coeffs[0] = 1.0
        return RotatorState(label, kind, coeffs, EvalResult(1.0, 0.0, "series"), 0.0)

    norm = normalization(kind, abs2, tol)
    log_norm = math.log(float(norm.value))
    log_abs2 = 2.0 * _log_abs_psi(kind, abs2, n_max + 1) - log_norm
    tail = _tail_after(log_abs2, kind, abs2, n_max)
    if tail >= TAIL_LIMIT:
        suggested = _suggest_n_max(kind, abs2, log_norm, n_max)
        raise TruncationError(
            f"n_max={n_max} leaves a tail of {tail:.3g} for |α|²={abs2:g}; use n_max >= {suggested}",
            suggested,
        )
    n = np.arange(n_max)
    phase = np.exp(1j * n * np.angle(label.alpha))
    coeffs[:] = np.exp(0.5 * log_abs2[:n_max]) * phase
    total = math.fsum(np.abs(coeffs) ** 2)
    if abs(total + tail - 1.0) > NORM_TOLERANCE + norm.err_estimate / float(norm.value):
        raise TruncationError(f"coefficients sum to {total!r} instead of 1", 2 * n_max)
    return RotatorState(label, kind, coeffs, norm, tail)


def eigen_residual(state: RotatorState) -> float:
    """``max |([â] c - α c)_n|`` over ``n <= n_max - 2``."""

    a = deformed_annihilator(state.kind, state.n_max)
    residual = a @ state.coeffs - state.label.alpha * state.coeffs
    return float(np.max(np.abs(residual[:-1])))


def level_frequencies(kind: SpectrumKind, count: int) -> NDArray[np.float64]:
    """``(E(n+1) - E(n)) / λ²`` for ``n < count`` (``1`` at ``λ = 0``)."""

    energies = energy_levels(kind, count + 1)
    return 2.0 / (energies[:-1] + energies[1:])


def evolve_mean_a(state: RotatorState, tau: ArrayLike) -> NDArray[np.complex128]:
    """``ā(τ) = ±α Σ |c_n|² exp(∓i τ (E(n+1) - E(n))/λ²)``."""

    times = np.atleast_1d(np.asarray(tau, dtype=float))
    weights = state.probabilities[:-1]
    freqs = level_frequencies(state.kind, state.n_max - 1)
    charge = state.label.charge
    phases = np.exp(-1j * charge * np.outer(times, freqs))
    return charge * state.label.alpha * (phases @ weights)


def evolve_mean_a_closed(label: CoherentLabel, lambda_: float, tau: ArrayLike) -> NDArray[np.complex128]:
    """First relativistic correction::

        ±α exp(-2|α|² sin²(λ²τ/2)) exp(∓i[(1 - λ²)τ - |α|² sin(λ²τ)])
    """

    times = np.atleast_1d(np.asarray(tau, dtype=float))
    lam2 = lambda_**2
    abs2 = label.abs2
    envelope = np.exp(-2.0 * abs2 * np.sin(0.5 * lam2 * times) ** 2)
    phase = np.exp(-1j * label.charge * ((1.0 - lam2) * times - abs2 * np.sin(lam2 * times)))
    return label.charge * label.alpha * envelope * phase


def low_frequency(lambda_: float) -> float:
    """Angular modulation frequency ``Ω/ω = λ²`` in ``τ`` units."""

    return lambda_**2


def low_frequency_exact(kind: SpectrumKind) -> float:
    """Modulation frequency from the second difference ``|E(2) - 2E(1) + E(0)| / λ²``."""

    energies = energy_levels(kind, 3)
    return abs(energies[2] - 2.0 * energies[1] + energies[0]) / kind.lambda_**2


def low_frequency_peak(values: ArrayLike, tau: ArrayLike) -> tuple[float, float]:
    """Angular frequency of the dominant FFT peak of ``values`` and the grid resolution.

    ``tau`` must be uniform; the mean is removed before the transform.
    """

    samples = np.asarray(values, dtype=float)
    times = np.asarray(tau, dtype=float)
    step = float(times[1] - times[0])
    spectrum = np.abs(np.fft.rfft(samples - samples.mean()))
    freqs = 2.0 * math.pi * np.fft.rfftfreq(len(samples), step)
    peak = int(np.argmax(spectrum[1:])) + 1
    return float(freqs[peak]), float(freqs[1])


@dataclass(frozen=True)
class DynamicsAgreement:
    max_deviation: float
    window: float


def dynamics_agreement(
    lambda_: float,
    alpha: complex,
    window: float | None = None,
    points: int = 4001,
    n_max: int = 64,
) -> DynamicsAgreement:
    """``max_τ |ā - ā_closed|`` over ``[0, window]`` (default one low-frequency period)."""

    label = CoherentLabel(alpha)
    span = window if window is not None else 2.0 * math.pi / low_frequency(lambda_)
    tau = np.linspace(0.0, span, points)
    state = build_state(label, lambda_, n_max)
    deviation = np.abs(evolve_mean_a(state, tau) - evolve_mean_a_closed(label, lambda_, tau))
    return DynamicsAgreement(float(deviation.max()), span)


def evolved_coefficients(state: RotatorState, tau: float) -> NDArray[np.complex128]:
    """``c_n exp(∓i E(n) τ / λ²)``."""

    energies = energy_levels(state.kind, state.n_max)
    return state.coeffs * np.exp(-1j * state.label.charge * energies * tau / state.lambda_**2)


def r2_trajectory(state: RotatorState, tau: ArrayLike) -> NDArray[np.float64]:
    """``⟨R̂²⟩ = ⟨2n̂ + 1⟩`` along the evolution."""

    weights = 2.0 * np.arange(state.n_max) + 1.0
    return np.array(
        [math.fsum(weights * np.abs(evolved_coefficients(state, t)) ** 2) for t in np.atleast_1d(tau)]
    )


@dataclass(frozen=True)
class RadiusStats:
    """``R̄² = 2|α|²`` and the gyration-radius dispersion ``ΔR²`` (``σ²`` units)."""

    r2_mean: float
    dispersion: float
    err_estimate: float


def radius_stats(kind: SpectrumKind, abs_alpha2: float, tol: float = 1e-14) -> RadiusStats:
    """``ΔR² = 1 - R̄² (1 - S/N(R̄²/2))`` with ``S = Σ R̄^{2n}/(2ⁿ n! [ε²(n+1)]!)``.

    ``N(R̄²/2)`` is the normalisation evaluated at ``|α|²``.
    """

    if abs_alpha2 == 0:
        return RadiusStats(0.0, 1.0, 0.0)
    norm = normalization(kind, abs_alpha2, tol)
    log_x = math.log(abs_alpha2)
    log_fact = log_eps_factorial_table(kind, 4096)

    def term(n: int) -> float:
        return math.exp(n * log_x - float(gammaln(n + 1)) - 2.0 * log_fact[n + 1])

    scale = math.exp(abs_alpha2)
    shifted = sum_series(term, SeriesSpec(tol=tol * max(1.0, scale)))
    ratio = float(shifted.value) / float(norm.value)
    r2 = 2.0 * abs_alpha2
    err = r2 * (shifted.err_estimate + ratio * norm.err_estimate) / float(norm.value)
    return RadiusStats(r2, 1.0 - r2 * (1.0 - ratio), err)


def radius_dispersion_direct(state: RotatorState) -> float:
    """``⟨R̂²⟩ - 2|ā(0)|²`` straight from the coefficient vector."""

    weights = 2.0 * np.arange(state.n_max) + 1.0
    mean_a = evolve_mean_a(state, [0.0])[0]
    return math.fsum(weights * state.probabilities) - 2.0 * abs(mean_a) ** 2


def unity_moments(kind: SpectrumKind, n_values: ArrayLike) -> NDArray[np.float64]:
    """Target moments ``n! [ε²(n)]!`` of the resolution-of-unity weight."""

    n = np.atleast_1d(np.asarray(n_values, dtype=int))
    if np.any(n < 0):
        raise DomainError("moment orders must be >= 0")
    log_fact = log_eps_factorial_table(kind, int(n.max()))
    return np.exp(gammaln(n + 1) + 2.0 * log_fact[n])


@dataclass(frozen=True)
class MomentCheck:
    """Relative gaps between sampled-weight moments and their targets."""

    orders: NDArray[np.int64]
    moments: NDArray[np.float64]
    targets: NDArray[np.float64]
    rel_errors: NDArray[np.float64]

    @property
    def max_rel_error(self) -> float:
        return float(self.rel_errors.max())


def verify_weight(
    weight: ArrayLike, x: ArrayLike, kind: SpectrumKind, n_max_check: int, tail_tol: float = 1e-10
) -> MomentCheck:
    """Compare ``∫ xⁿ W(x) dx`` (Simpson on the sample grid) with ``n! [ε²(n)]!``.

    Raises
    ------
    GridResolutionError
        When the sampled weight is still significant at the end of the grid.
    """

    w = np.asarray(weight, dtype=float)
    grid = np.asarray(x, dtype=float)
    if w.shape != grid.shape:
        raise DomainError(f"weight and grid shapes differ: {w.shape} != {grid.shape}")
    if np.any(w < 0):
        warnings.warn(
            f"weight is negative at {int(np.sum(w < 0))} grid points", RuntimeWarning, stacklevel=2
        )
    orders = np.arange(n_max_check + 1)
    targets = unity_moments(kind, orders)
    x_end = float(grid[-1])
    moments = np.empty(len(orders))
    for n in orders:
        tail = abs(w[-1]) * x_end ** (n + 1)
        if tail > tail_tol * targets[n]:
            raise GridResolutionError(
                f"weight still {abs(w[-1]):.3g} at x={x_end:g}; moment {n} needs a longer grid"
            )
        moments[n] = simpson(grid**n * w, x=grid)
    rel = np.abs(moments - targets) / targets
    return MomentCheck(orders, moments, targets, rel)


def radius_classical(label: CoherentLabel) -> float:
    """Constant classical gyration radius ``√2 |α|``."""

    return math.sqrt(2.0) * abs(label.alpha)


FIG3_PRESETS: dict[str, tuple[float, float, float]] = {
    "a": (0.1, 0.5, 0.5),
    "b": (50.0, 0.5, 0.5),
    "c": (0.1, 2.0, 2.0),
    "d": (50.0, 2.0, 2.0),
}


def fig3_presets() -> dict[str, tuple[float, float, float]]:
    """``(λ, q̄, p̄)`` for the four mean-radius panels (dimensionless means)."""

    return dict(FIG3_PRESETS)


def fig3_tau_grid(lambda_: float, points: int = 1001, periods: float = 2.0) -> NDArray[np.float64]:
    """Uniform ``τ`` grid over ``periods`` low-frequency periods."""

    omega = low_frequency_exact(SpectrumKind.rotator(lambda_))
    return np.linspace(0.0, periods * 2.0 * math.pi / omega, points)


def fig3_data(lambda_: float, alpha: complex, tau: ArrayLike, n_max: int = 64) -> Table:
    """Mean gyration radius ``√2 |ā(τ)|``: classical, nonlocal and standard columns."""

    label = CoherentLabel(alpha)
    times = np.atleast_1d(np.asarray(tau, dtype=float))
    standard = np.sqrt(2.0) * np.abs(evolve_mean_a(build_state(label, lambda_, n_max), times))
    nonlocal_ = np.sqrt(2.0) * np.abs(
        evolve_mean_a(build_state(label, lambda_, n_max, deformed=False), times)
    )
    table = Table(["tau", "classical", "nonlocal", "standard"])
    classical = radius_classical(label)
    for t, nl, st in zip(times, nonlocal_, standard, strict=True):
        table.add(t, classical, nl, st)
    return table


def fig4_data(omegas: ArrayLike, mean_radii: list[float], threads: int | None = None) -> Table:
    """Gyration-radius dispersion (``λ_c²``) against cyclotron frequency (``mc²/ħ``).

    ``λ = √ω``; a mean radius ``⟨R⟩`` in ``λ_c`` fixes ``|α|² = ⟨R⟩² ω / 2``.
    The nonlocal column is ``1/ω``.
    """

    grid = [float(w) for w in np.atleast_1d(np.asarray(omegas, dtype=float))]
    table = Table(["omega", "nonlocal", *(f"dr2_R_{r:g}" for r in mean_radii)])

    def row(omega: float) -> tuple[list[float], list[str]]:
        kind = SpectrumKind.rotator(math.sqrt(omega))
        values, failures = [], []
        for radius in mean_radii:
            try:
                stats = radius_stats(kind, radius**2 * omega / 2.0)
                values.append(stats.dispersion / omega)
            except (DomainError, ArithmeticError, RuntimeError) as exc:
                values.append(math.nan)
                failures.append(f"omega={omega!r}, R={radius!r}: {exc}")
        return values, failures

    for omega, (values, failures) in zip(grid, parallel_map(row, grid, threads), strict=True):
        table.add(omega, 1.0 / omega, *values)
        table.failures.extend(failures)
    return table
