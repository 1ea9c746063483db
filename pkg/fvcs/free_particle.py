"""Free-particle coherent states.

Internally the momentum ``p`` is dimensionless, measured in ``ħ/σ``; the
Gaussian momentum profile is centred at ``√2 α″``. Multiplying by ``λ``
converts to ``mc`` units: the mean momentum is ``p̄ = √2 α″ λ`` and the
momentum spread ``Δp = λ/√2``. Coordinate dispersions ``Δq²`` are in ``σ²``
units; ``√(Δq²)/λ`` converts to ``λ_c``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import gammaln, logsumexp

from .config import CoherentLabel, EvalResult
from .errors import DivergenceError, DomainError
from .numerics import (
    QuadratureSpec,
    SeriesSpec,
    gen_binomial,
    integrate_gaussian,
    log_gamma_half_table,
    parallel_map,
    sum_series,
)
from .output import Table

SQRT2 = math.sqrt(2.0)
SQRT_PI = math.sqrt(math.pi)

SERIES_ACCURACY = 1e-9
SLOPE_STEP = 1e-4


@dataclass(frozen=True)
class FreeState:
    """Free-particle coherent state ``|α, ±⟩`` at localisation ``λ``."""

    label: CoherentLabel
    lambda_: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lambda_) and self.lambda_ > 0):
            raise DomainError(f"lambda must be > 0, got {self.lambda_}")

    @classmethod
    def from_momentum(cls, p_mean: float, lambda_: float, q_re: float = 0.0) -> FreeState:
        """State with mean momentum ``p_mean`` in ``mc`` units."""
        return cls(CoherentLabel(complex(q_re, p_mean / (SQRT2 * lambda_))), lambda_)

    @property
    def center(self) -> float:
        """Centre ``√2 α″`` of the momentum profile."""
        return SQRT2 * self.label.im

    @property
    def p_mean(self) -> float:
        """Mean momentum in ``mc`` units."""
        return self.center * self.lambda_


def wavefunction(state: FreeState, p: ArrayLike) -> NDArray[np.complex128]:
    """Two-component momentum wavefunction, shape ``(2, len(p))``.

    ``(1/(2π^{1/4})) (1 ± 1, 1 ∓ 1) exp(-(p - √2α″)²/2 - i√2α′p)``.
    """

    momenta = np.atleast_1d(np.asarray(p, dtype=float))
    envelope = np.exp(-0.5 * (momenta - state.center) ** 2 - 1j * SQRT2 * state.label.re * momenta)
    charge = state.label.charge
    spinor = np.array([1.0 + charge, 1.0 - charge]) / (2.0 * math.pi**0.25)
    return spinor[:, np.newaxis] * envelope[np.newaxis, :]


def _spec(state: FreeState, tol: float) -> QuadratureSpec:
    return QuadratureSpec(center=state.center, width=1.0, tol=tol)


def state_norm(state: FreeState, tol: float = 1e-12) -> EvalResult:
    """``∫ |Ψ(p)|² dp``."""

    def density(p: NDArray[np.float64]) -> NDArray[np.float64]:
        return np.sum(np.abs(wavefunction(state, p)) ** 2, axis=0)

    return integrate_gaussian(density, _spec(state, tol))


def mean_velocity_quad(state: FreeState, tol: float = 1e-12) -> EvalResult:
    """``v̄ = λ/√π ∫ p/√(1 + λ²p²) exp(-(p - √2α″)²) dp`` in units of ``c``."""

    lam = state.lambda_
    center = state.center

    def integrand(p: NDArray[np.float64]) -> NDArray[np.float64]:
        return p / np.sqrt(1.0 + (lam * p) ** 2) * np.exp(-((p - center) ** 2))

    raw = integrate_gaussian(integrand, _spec(state, tol / max(lam, 1.0)))
    return EvalResult(lam / SQRT_PI * raw.value, lam / SQRT_PI * raw.err_estimate, "quadrature")


def _velocity_group(lam: float, center: float, j: int, log_gamma_half: NDArray[np.float64]) -> float:
    """All terms of total order ``j`` (``n + k = j``) of the velocity series.

    ``binom(-1/2, j) λ^{2j} Σ_k binom(2j+1, 2k) c^{2(j-k)+1} Γ(k+1/2)``, the
    inner sum being positive for ``c > 0``.
    """

    k = np.arange(j + 1)
    log_binom = gammaln(2 * j + 2) - gammaln(2 * k + 1) - gammaln(2 * (j - k) + 2)
    log_inner = logsumexp(log_binom + (2 * (j - k) + 1) * math.log(abs(center)) + log_gamma_half[k])
    return math.copysign(1.0, center) * gen_binomial(-0.5, j) * math.exp(2 * j * math.log(lam) + log_inner)


def mean_velocity_series(
    state: FreeState,
    tol: float = 1e-14,
    accuracy: float = SERIES_ACCURACY,
    linear_only: bool = False,
) -> EvalResult:
    """Mean velocity from the power series in ``λ``.

    The series is asymptotic: its terms shrink and then grow again. When the
    growth starts before the tail is below ``tol`` the sum is truncated at the
    smallest term, whose size becomes the error estimate. If that estimate
    exceeds ``accuracy`` the cell is outside the usable region.

    ``linear_only`` keeps only the ``n = 0`` terms, which sum to ``p̄/m*``.

    Raises
    ------
    DivergenceError
        Outside the usable region; use :func:`mean_velocity_quad` there.
    """

    lam = state.lambda_
    center = state.center
    if center == 0:
        return EvalResult(0.0, 0.0, "series")
    prefactor = lam / SQRT_PI
    log_gh = log_gamma_half_table(4096)

    if linear_only:

        def term(k: int) -> float:
            return (
                prefactor
                * center
                * gen_binomial(-0.5, k)
                * (2 * k + 1)
                * math.exp(2 * k * math.log(lam) + log_gh[k])
            )
    else:

        def term(j: int) -> float:
            return prefactor * _velocity_group(lam, center, j, log_gh)

    try:
        return sum_series(term, SeriesSpec(tol=tol, max_terms=4096))
    except DivergenceError as exc:
        if exc.err_estimate <= accuracy:
            return EvalResult(exc.value, exc.err_estimate, "series")
        raise DivergenceError(
            f"velocity series diverges at λ={lam:g}, α″={state.label.im:g} "
            f"(smallest term {exc.err_estimate:.3g} at order {exc.index - 1}); use the quadrature path",
            exc.index,
            exc.value,
            exc.err_estimate,
        ) from exc


def effective_mass(lambda_: float, tol: float = 1e-13) -> float:
    """``m*/m`` from ``1/m* = (2/√π) ∫ p² e^{-p²} (1 + λ²p²)^{-1/2} dp``.

    This integral is the Borel-summed form of the power series in ``λ²``;
    :func:`effective_mass_series` sums the series itself.
    """

    if not (math.isfinite(lambda_) and lambda_ >= 0):
        raise DomainError(f"lambda must be >= 0, got {lambda_}")
    if lambda_ == 0:
        return 1.0

    def integrand(p: NDArray[np.float64]) -> NDArray[np.float64]:
        return p * p * np.exp(-p * p) / np.sqrt(1.0 + (lambda_ * p) ** 2)

    inverse = 2.0 / SQRT_PI * integrate_gaussian(integrand, QuadratureSpec(tol=tol)).value
    return 1.0 / inverse


def effective_mass_series(lambda_: float, tol: float = 1e-14) -> float:
    """``m*/m = 1 / ((2/√π) Σ λ^{2n} binom(-1/2, n) Γ(n + 3/2))``.

    Raises
    ------
    DivergenceError
        When the series terms grow before reaching ``tol``; the message names ``λ``.
    """

    if lambda_ == 0:
        return 1.0
    log_gh = log_gamma_half_table(4096)
    log_lam2 = 2.0 * math.log(lambda_)

    def term(n: int) -> float:
        # Γ(n + 3/2) = Γ((n + 1) + 1/2)
        return 2.0 / SQRT_PI * gen_binomial(-0.5, n) * math.exp(n * log_lam2 + log_gh[n + 1])

    try:
        inverse = sum_series(term, SeriesSpec(tol=tol, max_terms=4000)).value
    except DivergenceError as exc:
        raise DivergenceError(
            f"effective-mass series diverges at λ={lambda_:g} (term {exc.index})",
            exc.index,
            exc.value,
            exc.err_estimate,
        ) from exc
    return 1.0 / float(inverse)


def velocity_slope(lambda_: float, step: float = SLOPE_STEP, tol: float = 1e-13) -> float:
    """Central-difference ``dv̄/dp̄`` at ``p̄ = 0`` (``p̄`` in ``mc`` units)."""

    up = mean_velocity_quad(FreeState.from_momentum(step, lambda_), tol).value
    down = mean_velocity_quad(FreeState.from_momentum(-step, lambda_), tol).value
    return float((up - down) / (2.0 * step))


def coord_dispersion(state: FreeState, tol: float = 1e-12) -> EvalResult:
    """``Δq² = 1/2 - λ⁴/(4√π) ∫ p²/(1 + λ²p²)² exp(-(p - √2α″)²) dp`` in ``σ²`` units.

    May be negative for large ``λ``.
    """

    lam = state.lambda_
    center = state.center
    scale = lam**4 / (4.0 * SQRT_PI)

    def integrand(p: NDArray[np.float64]) -> NDArray[np.float64]:
        return p * p / (1.0 + (lam * p) ** 2) ** 2 * np.exp(-((p - center) ** 2))

    raw = integrate_gaussian(integrand, _spec(state, tol / max(scale, 1.0)))
    return EvalResult(0.5 - scale * raw.value, scale * raw.err_estimate, "quadrature")


def momentum_dispersion(state: FreeState, tol: float = 1e-12) -> EvalResult:
    """``Δp²`` in ``(mc)²`` units by quadrature; equals ``λ²/2``."""

    center = state.center

    def integrand(p: NDArray[np.float64]) -> NDArray[np.float64]:
        return (p - center) ** 2 * np.exp(-((p - center) ** 2)) / SQRT_PI

    raw = integrate_gaussian(integrand, _spec(state, tol))
    scale = state.lambda_**2
    return EvalResult(scale * raw.value, scale * raw.err_estimate, "quadrature")


def classical_velocity(p: float) -> float:
    """``v = p/√(1 + p²)`` for a classical relativistic particle (``p`` in ``mc``)."""

    return p / math.hypot(1.0, p)


def fig1_data(
    lambdas: list[float], p_grid: ArrayLike, tol: float = 1e-12, threads: int | None = None
) -> Table:
    """Mean velocity against mean momentum (``mc``) for each ``λ`` plus the classical curve."""

    momenta = [float(p) for p in np.atleast_1d(np.asarray(p_grid, dtype=float))]
    table = Table(["p_mean_mc", "classical", *(f"v_lambda_{lam:g}" for lam in lambdas)])

    def row(p: float) -> tuple[list[float], list[str]]:
        values, failures = [], []
        for lam in lambdas:
            try:
                values.append(mean_velocity_quad(FreeState.from_momentum(p, lam), tol).value)
            except (DomainError, ArithmeticError, RuntimeError) as exc:
                values.append(math.nan)
                failures.append(f"p={p!r}, lambda={lam!r}: {exc}")
        return values, failures

    for p, (values, failures) in zip(momenta, parallel_map(row, momenta, threads), strict=True):
        table.add(p, classical_velocity(p), *values)
        table.failures.extend(failures)
    return table


def fig2_data(
    alpha_im_values: list[float], dp_grid: ArrayLike, tol: float = 1e-12, threads: int | None = None
) -> Table:
    """Coordinate dispersion against momentum spread.

    For each ``Δp`` (``mc``) the localisation is ``λ = √2 Δp``. Columns hold
    ``Δq²`` in ``σ²`` units and ``Δq = √(Δq²)/λ`` in ``λ_c`` (``nan`` when
    ``Δq² < 0``), next to the nonlocal reference ``Δq = 1/(2Δp)``.
    """

    spreads = [float(dp) for dp in np.atleast_1d(np.asarray(dp_grid, dtype=float))]
    columns = ["dp_mc", "reference"]
    for a in alpha_im_values:
        columns += [f"dq2_alpha_{a:g}", f"dq_alpha_{a:g}"]
    table = Table(columns)

    def row(dp: float) -> tuple[list[float], list[str]]:
        lam = SQRT2 * dp
        values, failures = [], []
        for a in alpha_im_values:
            try:
                dq2 = float(coord_dispersion(FreeState(CoherentLabel(complex(0.0, a)), lam), tol).value)
            except (DomainError, ArithmeticError, RuntimeError) as exc:
                values += [math.nan, math.nan]
                failures.append(f"dp={dp!r}, alpha_im={a!r}: {exc}")
                continue
            values += [dq2, math.sqrt(dq2) / lam if dq2 >= 0 else math.nan]
        return values, failures

    for dp, (values, failures) in zip(spreads, parallel_map(row, spreads, threads), strict=True):
        table.add(dp, 1.0 / (2.0 * dp), *values)
        table.failures.extend(failures)
    return table
