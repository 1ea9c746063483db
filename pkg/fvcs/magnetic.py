"""Coherent states of a spin-0 particle in a constant homogeneous magnetic field.

The longitudinal momentum is discretised on Gauss-Hermite nodes matched to
the Gaussian profile ``Ψ_{α_z}(p) = π^{-1/4} exp(-(p - √2α_z″)²/2 - i√2α_z′p)``
with ``p`` in ``ħ/σ_z`` units; ``p_z = λ_z p`` in ``mc`` units. A state is
stored as a ``(n_max, nodes)`` array whose column ``j`` is the rotational
fiber at node ``p_j`` times the amplitude ``Ψ(p_j) √(w_j e^{x_j²})``, so the
plain sum of squared moduli is the state norm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.optimize import brentq
from scipy.special import gammaln

from .config import CoherentLabel, PhysicalParams
from .errors import ConvergenceError, DomainError
from .fock import deformed_annihilator
from .free_particle import effective_mass
from .numerics import gauss_hermite_nodes
from .rotator import build_state_for_kind, evolve_mean_a_closed
from .spectrum import SpectrumKind

Variant = Literal["translational", "rotational", "product", "mixed"]

DEFAULT_NODES = 48
SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class MagneticState:
    """One of the four magnetic-field state families.

    ``delta_normalized`` marks the fixed-``p_z`` family, which is normalised on
    a δ function and therefore has no finite norm.
    """

    variant: Variant
    lambda_r: float
    lambda_z: float
    label_r: CoherentLabel | None
    alpha_z: complex
    level: int
    p_z_nodes: NDArray[np.float64] = field(repr=False)
    coeffs: NDArray[np.complex128] = field(repr=False)
    delta_normalized: bool = False

    @property
    def n_max(self) -> int:
        return self.coeffs.shape[0]

    @property
    def p_z_mean(self) -> float:
        """Mean longitudinal momentum ``√2 α_z″ λ_z`` (``mc``)."""
        return SQRT2 * self.alpha_z.imag * self.lambda_z


def longitudinal_amplitudes(
    alpha_z: complex, nodes: int = DEFAULT_NODES
) -> tuple[NDArray[np.float64], NDArray[np.complex128]]:
    """Gauss-Hermite nodes ``p_j`` (``ħ/σ_z``) and amplitudes with ``Σ |A_j|² = 1``."""

    p, w = gauss_hermite_nodes(nodes, SQRT2 * alpha_z.imag)
    amplitudes = np.sqrt(w / math.sqrt(math.pi)) * np.exp(-1j * SQRT2 * alpha_z.real * p)
    return p, amplitudes


def _glauber(label: CoherentLabel, n_max: int) -> NDArray[np.complex128]:
    n = np.arange(n_max)
    if label.abs2 == 0:
        coeffs = np.zeros(n_max, dtype=complex)
        coeffs[0] = 1.0
        return coeffs
    log_abs = -0.5 * label.abs2 + n * math.log(abs(label.alpha)) - 0.5 * gammaln(n + 1)
    return np.exp(log_abs) * np.exp(1j * n * np.angle(label.alpha))


def build_magnetic_state(
    variant: Variant,
    params: PhysicalParams,
    alpha_r: complex = 0.0,
    alpha_z: complex = 0.0,
    *,
    level: int = 0,
    p_z: float = 0.0,
    charge: int = 1,
    nodes: int = DEFAULT_NODES,
) -> MagneticState:
    """Build a state of the requested family.

    Parameters
    ----------
    variant:
        ``translational`` (level ``n`` times a longitudinal coherent state),
        ``rotational`` (deformed rotational coherent state at fixed ``p_z``),
        ``product`` (standard rotational coherent state times a longitudinal
        one) or ``mixed`` (the fixed-``p_z`` states integrated against the
        longitudinal profile).
    params:
        Supplies ``lambda_r``, ``lambda_z`` and ``n_max``.
    p_z:
        Longitudinal momentum in ``mc`` for the ``rotational`` family.
    """

    lam_r, lam_z, n_max = params.lambda_r, params.lambda_z, params.n_max
    label = CoherentLabel(alpha_r, charge)
    alpha_z = complex(alpha_z)

    if variant == "rotational":
        kind = SpectrumKind.magnetic(lam_r, p_z)
        fiber = build_state_for_kind(label, kind, n_max).coeffs
        return MagneticState(
            variant, lam_r, lam_z, label, alpha_z, 0, np.array([p_z]), fiber[:, np.newaxis], True
        )

    p, amplitudes = longitudinal_amplitudes(alpha_z, nodes)
    p_mc = lam_z * p
    if variant == "translational":
        if not 0 <= level < n_max:
            raise DomainError(f"level must lie in [0, {n_max}), got {level}")
        rotational = np.zeros(n_max, dtype=complex)
        rotational[level] = 1.0
        coeffs = np.outer(rotational, amplitudes)
        return MagneticState(variant, lam_r, lam_z, None, alpha_z, level, p_mc, coeffs)
    if variant == "product":
        coeffs = np.outer(_glauber(label, n_max), amplitudes)
        return MagneticState(variant, lam_r, lam_z, label, alpha_z, 0, p_mc, coeffs)
    if variant == "mixed":
        columns = [
            build_state_for_kind(label, SpectrumKind.magnetic(lam_r, float(pz)), n_max).coeffs
            for pz in p_mc
        ]
        coeffs = np.stack(columns, axis=1) * amplitudes[np.newaxis, :]
        return MagneticState(variant, lam_r, lam_z, label, alpha_z, 0, p_mc, coeffs)
    raise DomainError(f"unknown magnetic state variant '{variant}'")


def state_norm(state: MagneticState) -> float:
    """``Σ |coeffs|²``; undefined for the δ-normalised family."""

    if state.delta_normalized:
        raise DomainError("fixed-p_z states are normalised on a delta function")
    return math.fsum(np.abs(state.coeffs.ravel()) ** 2)


def marginals(state: MagneticState) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Rotational level populations and longitudinal node weights."""

    density = np.abs(state.coeffs) ** 2
    return density.sum(axis=1), density.sum(axis=0)


def mixed_eigen_residual(state: MagneticState) -> float:
    """``max |b ε(n̂, p_j) c_j - α_r c_j|`` over nodes and interior levels."""

    if state.label_r is None:
        raise DomainError("translational states are not rotational coherent states")
    residual = 0.0
    for j, pz in enumerate(state.p_z_nodes):
        a = deformed_annihilator(SpectrumKind.magnetic(state.lambda_r, float(pz)), state.n_max)
        column = state.coeffs[:, j]
        diff = a @ column - state.label_r.alpha * column
        residual = max(residual, float(np.max(np.abs(diff[:-1]))))
    return residual


def evolve_mean_ar(
    label_r: CoherentLabel,
    alpha_z: complex,
    lambda_r: float,
    lambda_z: float,
    tau: ArrayLike,
) -> NDArray[np.complex128]:
    """Mean rotational amplitude with finite longitudinal localisation.

    With ``s = λ_z⁴ τ²``::

        ±α_r (1 + s/4)^{-1/4} exp(-2|α_r|² sin²(λ_r²τ/2) - α_z″² s/(2 + s/2))
          × exp(∓i[(1 - λ_r²)τ - |α_r|² sin(λ_r²τ) - α_z″² λ_z² τ²/(1 + s/4) + arctan(s/4)/2])
    """

    times = np.atleast_1d(np.asarray(tau, dtype=float))
    s = lambda_z**4 * times**2
    im2 = complex(alpha_z).imag ** 2
    abs2 = label_r.abs2
    lam_r2 = lambda_r**2
    envelope = (1.0 + s / 4.0) ** -0.25 * np.exp(
        -2.0 * abs2 * np.sin(0.5 * lam_r2 * times) ** 2 - im2 * s / (2.0 + s / 2.0)
    )
    phase = (
        (1.0 - lam_r2) * times
        - abs2 * np.sin(lam_r2 * times)
        - im2 * lambda_z**2 * times**2 / (1.0 + s / 4.0)
        + 0.5 * np.arctan(s / 4.0)
    )
    return label_r.charge * label_r.alpha * envelope * np.exp(-1j * label_r.charge * phase)


def envelope_deviation(
    alpha_z: complex, lambda_r: float, lambda_z: float, tau: ArrayLike
) -> NDArray[np.float64]:
    """``|ā_r / ā_closed - 1|``; independent of ``α_r``."""

    unit = CoherentLabel(1.0)
    with_z = evolve_mean_ar(unit, alpha_z, lambda_r, lambda_z, tau)
    without = evolve_mean_a_closed(unit, lambda_r, tau)
    return np.abs(with_z / without - 1.0)


def crossover_time(
    alpha_z: complex, lambda_r: float, lambda_z: float, threshold: float = 0.01
) -> float:
    """First ``τ`` at which the longitudinal factors move ``ā_r`` by ``threshold`` (relative).

    Raises
    ------
    ConvergenceError
        When no crossover is found below ``τ = 10⁴/λ_z``.
    """

    if not lambda_z > 0:
        raise DomainError("crossover time needs lambda_z > 0")

    def excess(t: float) -> float:
        return float(envelope_deviation(alpha_z, lambda_r, lambda_z, [t])[0]) - threshold

    grid = np.geomspace(1e-3 / lambda_z, 1e4 / lambda_z, 2000)
    values = envelope_deviation(alpha_z, lambda_r, lambda_z, grid) - threshold
    above = np.nonzero(values > 0)[0]
    if len(above) == 0:
        raise ConvergenceError(
            f"no crossover below τ={grid[-1]:g} for λ_z={lambda_z:g}", math.nan, math.inf
        )
    first = int(above[0])
    if first == 0:
        return float(grid[0])
    return float(brentq(excess, grid[first - 1], grid[first], xtol=1e-12, rtol=1e-12))


def mean_vz_value(p_z_mean: float, abs_alpha_r2: float, lambda_z: float, omega: float) -> float:
    """``v̄_z = p̄_z [1/m* - ω(|α_r|² + 1/2)]`` in natural units."""

    return p_z_mean * (1.0 / effective_mass(lambda_z) - omega * (abs_alpha_r2 + 0.5))


def mean_vz(state: MagneticState, params: PhysicalParams) -> float:
    """Longitudinal mean velocity of a state built with :func:`build_magnetic_state`."""

    abs2 = state.label_r.abs2 if state.label_r is not None else state.level
    return mean_vz_value(state.p_z_mean, abs2, state.lambda_z, params.omega)
