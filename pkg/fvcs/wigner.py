"""Charge-invariant Wigner functions on rectangular phase-space grids.

Grid coordinates are dimensionless: ``q`` in ``σ`` and ``p`` in ``ħ/σ`` units.
With ``σ = 1/λ`` (``λ_c`` units) the exported figure columns are
``q/λ`` in ``λ_c`` and ``p λ`` in ``mc``.

The free-particle kernel is a cosine transform of
``((1 + λ²(p+x)²)/(1 + λ²(p-x)²))^{1/4} e^{-x²}`` on a uniform ``x`` grid.
The trapezoid rule is spectrally accurate there. Once the cosine wavelength
drops below four steps the weights switch to Filon form
``h sinc²(kh/2π)``, which integrates the piecewise-linear interpolant exactly
and suppresses aliasing.

The rotator kernel sums ``ε(m,n) ψ̄_m ψ_n H_mn`` with
``H_mn = e^{-|z|²} h_mn`` built by the recursion
``h_mn = (ū/√n) h_{m,n-1} - √(m/n) h_{m-1,n-1}``, ``u = √2 (q + ip)``. This is
the triple sum with the ``(-2(q²+p²))^{-k}`` factors absorbed, so it is
regular at the origin.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from numpy.typing import NDArray

from .config import CoherentLabel
from .errors import ConvergenceError, DomainError
from .free_particle import FreeState
from .output import Table, write_csv
from .rotator import RotatorState
from .spectrum import eps_two_arg_matrix

SQRT2 = math.sqrt(2.0)
SUPPORT_HALF_WIDTH = math.sqrt(-math.log(1e-18))
MAX_X_STEP = 0.02
NEGATIVE_THRESHOLD = -1e-12
IMAG_RESIDUE_LIMIT = 1e-10


@dataclass(frozen=True)
class GridSpec:
    q_min: float
    q_max: float
    q_points: int
    p_min: float
    p_max: float
    p_points: int

    def __post_init__(self) -> None:
        if self.q_points < 2 or self.p_points < 2:
            raise DomainError("grids need at least two points per axis")
        if not (self.q_max > self.q_min and self.p_max > self.p_min):
            raise DomainError("grid ranges must be increasing")

    @property
    def q(self) -> NDArray[np.float64]:
        return np.linspace(self.q_min, self.q_max, self.q_points)

    @property
    def p(self) -> NDArray[np.float64]:
        return np.linspace(self.p_min, self.p_max, self.p_points)


def grid_spec_for(
    label: CoherentLabel, width_count: float = 6.0, points: int = 121, include_origin: bool = True
) -> GridSpec:
    """Grid spanning ``width_count`` packet widths around ``(√2α′, √2α″)``."""

    q0, p0 = SQRT2 * label.re, SQRT2 * label.im
    q_lo, q_hi = q0 - width_count, q0 + width_count
    p_lo, p_hi = p0 - width_count, p0 + width_count
    if include_origin:
        q_lo, q_hi = min(q_lo, -1.0), max(q_hi, 1.0)
        p_lo, p_hi = min(p_lo, -1.0), max(p_hi, 1.0)
    return GridSpec(q_lo, q_hi, points, p_lo, p_hi, points)


@dataclass
class PhaseSpaceGrid:
    """Wigner values ``values[i, j]`` at ``(q[j], p[i])``."""

    q: NDArray[np.float64]
    p: NDArray[np.float64]
    values: NDArray[np.float64]
    meta: dict[str, Any] = field(default_factory=dict)

    @property
    def q_step(self) -> float:
        return float(self.q[1] - self.q[0])

    @property
    def p_step(self) -> float:
        return float(self.p[1] - self.p[0])


def _filon_weights(wavenumbers: NDArray[np.float64], step: float) -> NDArray[np.float64]:
    weights = np.full(wavenumbers.shape, step)
    fast = wavenumbers * step > 0.5 * math.pi
    weights[fast] = step * np.sinc(wavenumbers[fast] * step / (2.0 * math.pi)) ** 2
    return weights


def _free_values(
    state: FreeState, q: NDArray[np.float64], p: NDArray[np.float64]
) -> tuple[NDArray[np.float64], float, float]:
    """Values on the outer product of ``p`` (rows) and ``q`` (columns), plus the ``x`` step and half width."""

    lam = state.lambda_
    q0, p0 = SQRT2 * state.label.re, state.center
    step = min(MAX_X_STEP, 1.0 / (10.0 * lam))
    half = math.ceil(SUPPORT_HALF_WIDTH / step)
    x = step * np.arange(-half, half + 1)

    lam2 = lam * lam
    ratio = (
        (1.0 + lam2 * (p[:, None] + x[None, :]) ** 2) / (1.0 + lam2 * (p[:, None] - x[None, :]) ** 2)
    ) ** 0.25
    kernel = ratio * np.exp(-(x**2))[None, :]
    wavenumbers = 2.0 * np.abs(q - q0)
    cosines = np.cos(2.0 * np.outer(x, q - q0)) * _filon_weights(wavenumbers, step)[None, :]
    values = np.exp(-((p - p0) ** 2))[:, None] * (kernel @ cosines) / math.pi**1.5
    return values, step, float(x[-1])


def wigner_free(state: FreeState, spec: GridSpec) -> PhaseSpaceGrid:
    """Free-particle Wigner function (positive charge)::

        π^{-3/2} e^{-(p - √2α″)²} ∫ ((1 + λ²(p+x)²)/(1 + λ²(p-x)²))^{1/4} e^{-x²} cos(2(q - √2α′)x) dx

    Non-finite points are stored as ``nan`` and counted in ``meta["flagged"]``.
    """

    q, p = spec.q, spec.p
    values, step, half_width = _free_values(state, q, p)
    flagged = ~np.isfinite(values)
    values[flagged] = np.nan
    meta = {
        "kernel": "free",
        "lambda": state.lambda_,
        "alpha": [state.label.re, state.label.im],
        "x_step": step,
        "x_half_width": half_width,
        "flagged": int(flagged.sum()),
    }
    return PhaseSpaceGrid(q, p, values, meta)


def wigner_free_at(state: FreeState, q: float, p: float) -> float:
    """Single-point value of :func:`wigner_free`."""

    values, _, _ = _free_values(state, np.array([float(q)]), np.array([float(p)]))
    return float(values[0, 0])


def wigner_rotator(state: RotatorState, spec: GridSpec) -> PhaseSpaceGrid:
    """Rotator Wigner function (positive charge)::

        (1/π) e^{-|α|²} Σ_{m,n} ε(m,n) ψ̄_m ψ_n H_mn(q, p),   ψ_n = α^n/(√n! [ε(n)]!)

    Raises
    ------
    ConvergenceError
        If the assembled values keep an imaginary part above ``1e-10``.
    """

    size = state.n_max
    qq, pp = np.meshgrid(spec.q, spec.p)
    z = (qq + 1j * pp).ravel()
    u = SQRT2 * z
    u_bar = np.conj(u)

    coeffs = state.coeffs
    eps = eps_two_arg_matrix(state.kind, size)
    weighted = eps * coeffs[np.newaxis, :]
    total = np.zeros(z.shape, dtype=complex)
    previous: NDArray[np.complex128] | None = None
    for m in range(size):
        row = np.empty((size, z.size), dtype=complex)
        row[0] = 1.0 if previous is None else (u / math.sqrt(m)) * previous[0]
        for n in range(1, size):
            row[n] = (u_bar / math.sqrt(n)) * row[n - 1]
            if previous is not None:
                row[n] -= math.sqrt(m / n) * previous[n - 1]
        total += np.conj(coeffs[m]) * (weighted[m] @ row)
        previous = row

    log_scale = math.log(float(state.norm.value)) - state.label.abs2
    assembled = math.exp(log_scale) * np.exp(-np.abs(z) ** 2) * total / math.pi
    residue = float(np.max(np.abs(assembled.imag))) if assembled.size else 0.0
    if residue > IMAG_RESIDUE_LIMIT:
        raise ConvergenceError(
            f"Wigner sum keeps an imaginary part of {residue:.3g}", float(np.max(assembled.real)), residue
        )
    values = assembled.real.reshape(qq.shape)
    meta = {
        "kernel": "rotator",
        "lambda": state.lambda_,
        "alpha": [state.label.re, state.label.im],
        "deformed": state.kind.deformed,
        "n_max": size,
        "tail": state.tail,
        "imag_residue": residue,
    }
    return PhaseSpaceGrid(spec.q, spec.p, values, meta)


def marginals(grid: PhaseSpaceGrid) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """``(q marginal, p marginal)`` as step-weighted sums over the other axis."""

    return grid.values.sum(axis=0) * grid.p_step, grid.values.sum(axis=1) * grid.q_step


def mass(grid: PhaseSpaceGrid) -> float:
    """Step-weighted sum of all values."""

    return float(np.nansum(grid.values) * grid.q_step * grid.p_step)


@dataclass(frozen=True)
class Negativity:
    """Negative part of a grid; ``bbox`` is ``(q_lo, q_hi, p_lo, p_hi)`` or ``None``."""

    min_value: float
    fraction: float
    bbox: tuple[float, float, float, float] | None

    def contains(self, q: float, p: float) -> bool:
        if self.bbox is None:
            return False
        q_lo, q_hi, p_lo, p_hi = self.bbox
        return q_lo <= q <= q_hi and p_lo <= p <= p_hi


def negativity(grid: PhaseSpaceGrid, threshold: float = NEGATIVE_THRESHOLD) -> Negativity:
    negative = grid.values < threshold
    fraction = float(negative.sum()) / negative.size
    min_value = float(np.nanmin(grid.values))
    if not negative.any():
        return Negativity(min_value, 0.0, None)
    rows, cols = np.nonzero(negative)
    bbox = (
        float(grid.q[cols.min()]),
        float(grid.q[cols.max()]),
        float(grid.p[rows.min()]),
        float(grid.p[rows.max()]),
    )
    return Negativity(min_value, fraction, bbox)


def write_grid(grid: PhaseSpaceGrid, path: Path) -> tuple[Path, Path]:
    """Write ``path`` (CSV rows ``q, p, w, q_lambda_c, p_mc``; ``p`` outer, ``q`` inner) and a JSON header.

    The header lands next to the CSV with a ``.json`` suffix.
    """

    lam = float(grid.meta.get("lambda", 1.0))
    table = Table(["q", "p", "w", "q_lambda_c", "p_mc"])
    for i, p in enumerate(grid.p):
        for j, q in enumerate(grid.q):
            table.add(q, p, grid.values[i, j], q / lam, p * lam)
    csv_path = write_csv(table, path)
    header = dict(grid.meta)
    header.update(
        {
            "columns": table.columns,
            "q_range": [float(grid.q[0]), float(grid.q[-1]), len(grid.q)],
            "p_range": [float(grid.p[0]), float(grid.p[-1]), len(grid.p)],
            "units": {"q": "sigma", "p": "hbar/sigma", "q_lambda_c": "hbar/mc", "p_mc": "mc"},
        }
    )
    json_path = path.with_suffix(".json")
    json_path.write_text(json.dumps(header, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return csv_path, json_path


FIG5_LAMBDA = 8.0
FIG5_ALPHA = complex(0.0, 1.0 / SQRT2)
FIG6_LAMBDA = 8.0
FIG6_ALPHA = complex(SQRT2, SQRT2)
