"""Energy spectra and the ε/χ deformation factors built from adjacent levels.

For the discrete kinds the squared energy is linear in the level index,
``E(n)² = 1 + 2λ²(n + 1/2) + p_z²``, so ``E(n)² - E(n-1)² = 2λ²`` exactly.
All ε-related quantities are formed from that difference instead of from
``E(n) - E(n-1)`` directly, which keeps ``ε - 1`` accurate down to ``λ ~ 1e-8``
and for ``n`` in the tens of thousands.

``SpectrumKind.deformed=False`` keeps the energies but forces ``ε ≡ 1`` and
``χ ≡ 0``; this is the "nonlocal theory" baseline that comparison columns are
computed with.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import gammaln

from .config import EvalResult
from .errors import DomainError
from .numerics import SeriesSpec, sum_series

Kind = Literal["free", "rotator", "magnetic"]

PRINTED_ASYMPTOTE_NAME = "(5λ⁴+3)/(128λ⁴)"
LIMIT_COEFFICIENT = 1.0 / 32.0
# e^{|α|²} must stay representable as a float.
MAX_ABS_ALPHA2 = 700.0


@dataclass(frozen=True)
class SpectrumKind:
    """Which Hamiltonian the levels come from."""

    kind: Kind
    lambda_: float
    p_z: float = 0.0
    deformed: bool = True

    def __post_init__(self) -> None:
        if self.kind not in ("free", "rotator", "magnetic"):
            raise DomainError(f"unknown spectrum kind '{self.kind}'")
        if not (math.isfinite(self.lambda_) and self.lambda_ >= 0):
            raise DomainError(f"lambda must be finite and >= 0, got {self.lambda_}")
        if not math.isfinite(self.p_z):
            raise DomainError("p_z must be finite")
        if self.kind != "magnetic" and self.p_z != 0.0:
            raise DomainError("p_z only applies to the magnetic spectrum")

    @classmethod
    def free(cls, lambda_: float) -> SpectrumKind:
        return cls("free", lambda_)

    @classmethod
    def rotator(cls, lambda_: float, deformed: bool = True) -> SpectrumKind:
        return cls("rotator", lambda_, deformed=deformed)

    @classmethod
    def magnetic(cls, lambda_: float, p_z: float, deformed: bool = True) -> SpectrumKind:
        return cls("magnetic", lambda_, p_z, deformed)

    @property
    def discrete(self) -> bool:
        return self.kind != "free"

    def undeformed(self) -> SpectrumKind:
        return replace(self, deformed=False)

    def at_p_z(self, p_z: float) -> SpectrumKind:
        return replace(self, p_z=p_z)


@dataclass(frozen=True)
class EpsChi:
    """ε(n) and χ(n) for one level."""

    eps: float
    chi: float
    n: int

    @property
    def identity_residual(self) -> float:
        """``ε² - χ² - 1``; zero up to rounding."""
        return (self.eps - self.chi) * (self.eps + self.chi) - 1.0


def _require_discrete(kind: SpectrumKind) -> None:
    if not kind.discrete:
        raise DomainError("the free spectrum is continuous; ε factors need a discrete kind")


def _energy_sq(kind: SpectrumKind, n: NDArray[np.float64]) -> NDArray[np.float64]:
    return 1.0 + 2.0 * kind.lambda_**2 * (n + 0.5) + kind.p_z**2


def energy(kind: SpectrumKind, level_or_momentum: float) -> float:
    """Positive-branch energy in ``mc²``.

    For the free kind the argument is the momentum in ``mc`` units, for the
    discrete kinds it is the level index ``n >= 0``.
    """

    if kind.kind == "free":
        return math.hypot(1.0, level_or_momentum)
    if level_or_momentum < 0:
        raise DomainError(f"level must be >= 0, got {level_or_momentum}")
    return math.sqrt(float(_energy_sq(kind, np.float64(level_or_momentum))))


def energy_levels(kind: SpectrumKind, n_max: int) -> NDArray[np.float64]:
    """``E(0), ..., E(n_max - 1)``."""

    _require_discrete(kind)
    return np.sqrt(_energy_sq(kind, np.arange(n_max, dtype=float)))


def _eps_chi_pair(
    kind: SpectrumKind, lower: NDArray[np.float64], upper: NDArray[np.float64]
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """``ε - 1`` and ``χ`` for the level pair (lower, upper), elementwise."""

    e_lo = np.sqrt(_energy_sq(kind, lower))
    e_hi = np.sqrt(_energy_sq(kind, upper))
    gap = 2.0 * kind.lambda_**2 * (upper - lower) / (e_lo + e_hi)
    root_gap = gap / (np.sqrt(e_lo) + np.sqrt(e_hi))
    geometric = 2.0 * np.sqrt(e_lo * e_hi)
    eps_minus_one = root_gap**2 / geometric
    chi = -gap / geometric
    if not kind.deformed:
        return np.zeros_like(eps_minus_one), np.zeros_like(chi)
    return eps_minus_one, chi


def eps_minus_one_table(
    kind: SpectrumKind, n: ArrayLike
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Vectorised ``(ε(n) - 1, χ(n))`` for levels ``n >= 1``."""

    _require_discrete(kind)
    levels = np.asarray(n, dtype=float)
    if np.any(levels < 1):
        raise DomainError("ε(n) is defined for n >= 1 only")
    return _eps_chi_pair(kind, levels - 1.0, levels)


def eps_chi(kind: SpectrumKind, n: int) -> EpsChi:
    """ε(n) and χ(n) from the levels ``n - 1`` and ``n``.

    Raises
    ------
    DomainError
        For ``n <= 0`` or the continuous free spectrum.
    """

    _require_discrete(kind)
    if n <= 0:
        raise DomainError(f"ε(n) is defined for n >= 1, got {n}")
    eps_m1, chi = eps_minus_one_table(kind, [n])
    return EpsChi(1.0 + float(eps_m1[0]), float(chi[0]), n)


def eps_array(kind: SpectrumKind, n_max: int) -> NDArray[np.float64]:
    """``ε(0), ..., ε(n_max - 1)`` with the factorial convention ``ε(0) = 1``."""

    eps = np.ones(n_max)
    if n_max > 1:
        eps[1:] += eps_minus_one_table(kind, np.arange(1, n_max))[0]
    return eps


def chi_array(kind: SpectrumKind, n_max: int) -> NDArray[np.float64]:
    """``χ(0), ..., χ(n_max - 1)`` with ``χ(0) = 0``."""

    chi = np.zeros(n_max)
    if n_max > 1:
        chi[1:] = eps_minus_one_table(kind, np.arange(1, n_max))[1]
    return chi


def log_eps_factorial_table(kind: SpectrumKind, n_max: int) -> NDArray[np.float64]:
    """``log [ε(n)]!`` for ``n = 0 .. n_max``."""

    _require_discrete(kind)
    logs = np.log1p(eps_minus_one_table(kind, np.arange(1, n_max + 1))[0]) if n_max else []
    return np.concatenate(([0.0], np.cumsum(logs)))


def eps_factorial(kind: SpectrumKind, n: int) -> float:
    """``[ε(n)]! = ε(1) ε(2) ... ε(n)``, one for ``n = 0``."""

    if n < 0:
        raise DomainError(f"factorial index must be >= 0, got {n}")
    return math.exp(log_eps_factorial_table(kind, n)[n])


def eps_squared_factorial(kind: SpectrumKind, n: int) -> float:
    """``[ε²(n)]!`` computed as ``exp(2 Σ log ε(k))``."""

    if n < 0:
        raise DomainError(f"factorial index must be >= 0, got {n}")
    return math.exp(2.0 * log_eps_factorial_table(kind, n)[n])


def eps_two_arg(kind: SpectrumKind, n: int, m: int) -> float:
    """``(E(n) + E(m)) / (2 √(E(n) E(m)))``; symmetric and one on the diagonal."""

    _require_discrete(kind)
    if n < 0 or m < 0:
        raise DomainError(f"levels must be >= 0, got ({n}, {m})")
    if n == m:
        return 1.0
    lo, hi = (n, m) if n < m else (m, n)
    eps_m1, _ = _eps_chi_pair(kind, np.array([float(lo)]), np.array([float(hi)]))
    return 1.0 + float(eps_m1[0])


def eps_two_arg_matrix(kind: SpectrumKind, size: int) -> NDArray[np.float64]:
    """``ε(m, n)`` for ``m, n < size``."""

    _require_discrete(kind)
    idx = np.arange(size, dtype=float)
    lo = np.minimum.outer(idx, idx)
    hi = np.maximum.outer(idx, idx)
    eps_m1, _ = _eps_chi_pair(kind, lo, hi)
    return 1.0 + eps_m1


@dataclass(frozen=True)
class AsymptoteCheck:
    """Large-n behaviour of ε(n).

    ``residual`` subtracts the reference leading coefficient
    ``(5λ⁴+3)/(128λ⁴)``; ``limit_residual`` subtracts the limit ``1/32`` that
    ``n²(ε(n) - 1)`` is measured to approach.
    """

    n: int
    eps_minus_one: float
    reference_coefficient: float
    measured_coefficient: float
    residual: float
    limit_residual: float


def eps_asymptote_check(lambda_: float, n: int) -> AsymptoteCheck:
    """Compare ε(n) - 1 at a large level with its leading ``1/n²`` term."""

    if n < 10:
        raise DomainError(f"asymptote check needs n >= 10, got {n}")
    if not lambda_ > 0:
        raise DomainError("asymptote check needs lambda > 0")
    kind = SpectrumKind.rotator(lambda_)
    eps_m1 = float(eps_minus_one_table(kind, [n])[0][0])
    reference = (5.0 * lambda_**4 + 3.0) / (128.0 * lambda_**4)
    return AsymptoteCheck(
        n=n,
        eps_minus_one=eps_m1,
        reference_coefficient=reference,
        measured_coefficient=eps_m1 * n * n,
        residual=eps_m1 - reference / n**2,
        limit_residual=eps_m1 - LIMIT_COEFFICIENT / n**2,
    )


@dataclass(frozen=True)
class EpsBracket:
    """Fitted bounds ``exp(a/n²) < ε(n) < exp(b/n²)`` and the bracket they put on ``lim [ε(n)]!``."""

    a: float
    b: float
    lower_limit: float
    upper_limit: float
    factorial_at_n_max: float
    n_max: int


def eps_bracket(kind: SpectrumKind, n_max: int = 10_000) -> EpsBracket:
    """Fit ``a, b`` as the extremes of ``n² log ε(n)`` over ``1 <= n <= n_max``."""

    levels = np.arange(1, n_max + 1, dtype=float)
    log_eps = np.log1p(eps_minus_one_table(kind, levels)[0])
    scaled = levels**2 * log_eps
    # strict inequalities on the sampled range
    a = float(scaled.min()) * (1 - 1e-12)
    b = float(scaled.max()) * (1 + 1e-12)
    zeta2 = math.pi**2 / 6
    return EpsBracket(
        a=a,
        b=b,
        lower_limit=math.exp(zeta2 * a),
        upper_limit=math.exp(zeta2 * b),
        factorial_at_n_max=math.exp(math.fsum(log_eps)),
        n_max=n_max,
    )


class _LogEpsSquaredFactorial:
    """Running ``2 log [ε(n)]!`` for sequential term evaluation."""

    def __init__(self, kind: SpectrumKind) -> None:
        self._kind = kind
        self._values = [0.0]

    def __call__(self, n: int) -> float:
        while len(self._values) <= n:
            k = len(self._values)
            eps_m1 = eps_minus_one_table(self._kind, [k])[0][0]
            self._values.append(self._values[-1] + 2.0 * math.log1p(eps_m1))
        return self._values[n]


def normalization(kind: SpectrumKind, abs_alpha2: float, tol: float = 1e-14) -> EvalResult:
    """``N(|α|²) = Σ |α|^{2n} / (n! [ε²(n)]!)``.

    ``tol`` is relative to ``e^{|α|²}``, which bounds the sum from above.
    """

    _require_discrete(kind)
    if not (math.isfinite(abs_alpha2) and abs_alpha2 >= 0):
        raise DomainError(f"|α|² must be finite and >= 0, got {abs_alpha2}")
    if abs_alpha2 > MAX_ABS_ALPHA2:
        raise DomainError(
            f"|α|² = {abs_alpha2:g} exceeds {MAX_ABS_ALPHA2:g}; the normalization overflows"
        )
    if abs_alpha2 == 0:
        return EvalResult(1.0, 0.0, "series")

    log_x = math.log(abs_alpha2)
    log_fact = _LogEpsSquaredFactorial(kind)

    def term(n: int) -> float:
        return math.exp(n * log_x - float(gammaln(n + 1)) - log_fact(n))

    scale = math.exp(abs_alpha2)
    return sum_series(term, SeriesSpec(tol=tol * max(1.0, scale)))
