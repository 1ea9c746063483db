"""Shared numerical kernels.

Two independent engines live here: :func:`integrate_gaussian` (adaptive
Gauss-Kronrod quadrature on a truncated Gaussian support) and
:func:`sum_series` (term-by-term summation with a geometric tail bound and a
divergence guard). They share no evaluation code.
"""

from __future__ import annotations

import math
import os
import threading
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import TypeVar

import numpy as np
from numpy.typing import NDArray
from scipy.integrate import quad
from scipy.special import roots_hermite

from .config import EvalResult
from .errors import ConfigError, ConvergenceError, DivergenceError, DomainError

T = TypeVar("T")
R = TypeVar("R")

THREADS_ENV_VAR = "FVCS_THREADS"

_QUAD_LIMIT = 500
# QUADPACK keeps per-call state in module globals on older scipy builds.
_QUADPACK_LOCK = threading.RLock()
_LOG_SQRT_PI = 0.5 * math.log(math.pi)
_SQRT_PI = math.sqrt(math.pi)


@dataclass(frozen=True)
class QuadratureSpec:
    """Support and tolerance of a Gaussian-weighted integral.

    The integrand is truncated to ``center ± rel_cutoff * width``.
    """

    center: float = 0.0
    width: float = 1.0
    rel_cutoff: float = 12.0
    tol: float = 1e-12

    def __post_init__(self) -> None:
        if not self.width > 0:
            raise DomainError(f"quadrature width must be > 0, got {self.width}")
        if not self.tol > 0:
            raise DomainError(f"quadrature tol must be > 0, got {self.tol}")
        if not self.rel_cutoff >= 8:
            raise DomainError(f"quadrature cutoff must be >= 8 widths, got {self.rel_cutoff}")

    @property
    def interval(self) -> tuple[float, float]:
        half = self.rel_cutoff * self.width
        return self.center - half, self.center + half


@dataclass(frozen=True)
class SeriesSpec:
    """Stopping rules for :func:`sum_series`.

    ``burn_in`` is the first index at which the ratio guard may trip, and
    ``min_terms`` the number of terms always summed. A run of ``zero_run``
    exactly-zero terms ends the sum.
    """

    tol: float = 1e-14
    max_terms: int = 1_000_000
    ratio_guard: bool = True
    burn_in: int = 8
    min_terms: int = 2
    zero_run: int = 8

    def __post_init__(self) -> None:
        if not self.tol > 0:
            raise DomainError(f"series tol must be > 0, got {self.tol}")
        if self.max_terms < 1000:
            raise DomainError(f"max_terms must be >= 1000, got {self.max_terms}")
        if self.zero_run < 2:
            raise DomainError(f"zero_run must be >= 2, got {self.zero_run}")


def integrate_gaussian(
    f: Callable[[NDArray[np.float64]], NDArray[np.float64]], spec: QuadratureSpec
) -> EvalResult:
    """Integrate ``f`` over the real line.

    ``f`` must accept a numpy array and carry its own Gaussian factor. The
    truncated support is handed to QUADPACK's adaptive Gauss-Kronrod rule with
    an absolute tolerance of ``spec.tol``.

    Returns
    -------
    EvalResult
        ``method="quadrature"``; the error estimate is QUADPACK's.

    Raises
    ------
    ConvergenceError
        If the error estimate stays above ``spec.tol`` (beyond rounding) or
        ``f`` is not finite on the support.
    """

    lo, hi = spec.interval
    peak = 0.0

    def sample(p: float) -> float:
        nonlocal peak
        value = float(np.asarray(f(np.array([p])), dtype=float).reshape(-1)[0])
        if not math.isfinite(value):
            raise ConvergenceError(
                "integrand is not finite on the quadrature support", math.nan, math.inf
            )
        peak = max(peak, abs(value))
        return value

    with _QUADPACK_LOCK:
        result = quad(
            sample, lo, hi, epsabs=spec.tol, epsrel=0.0, limit=_QUAD_LIMIT, full_output=1
        )
    value, err = float(result[0]), float(result[1])
    # QUADPACK floors its estimate at 50 eps times the integral of |f|.
    rounding = 200 * np.finfo(float).eps * _SQRT_PI * spec.width * peak
    if err <= max(spec.tol, rounding):
        return EvalResult(value, err, "quadrature")
    raise ConvergenceError(
        f"quadrature did not reach tol {spec.tol:g} (error estimate {err:.3g})", value, err
    )


def sum_series(term: Callable[[int], complex | float], spec: SeriesSpec) -> EvalResult:
    """Sum ``term(0) + term(1) + ...`` until the tail is below ``spec.tol``.

    The tail after the last nonzero term ``t`` is bounded by ``|t| r / (1 - r)``
    with ``r`` the ratio to the nonzero term before it. Exact zeros are skipped
    by the ratio logic. Partial sums are formed once at the end with
    compensated summation, separately for real and imaginary parts.

    Raises
    ------
    DivergenceError
        When the ratio guard trips or a term is not finite. The guard trips
        when terms grow again after having decreased, or when the term ratio
        exceeds one and keeps increasing for ``spec.burn_in`` terms in a row.
        ``index`` names the offending term.
    ConvergenceError
        When ``spec.max_terms`` terms were not enough.
    """

    terms: list[complex] = []
    is_complex = False
    last: float | None = None
    last_ratio: float | None = None
    seen_decrease = False
    growth_run = 0
    zeros = 0

    for n in range(spec.max_terms):
        try:
            value = term(n)
        except OverflowError:
            value = math.inf
        if isinstance(value, complex) or np.iscomplexobj(value):
            is_complex = True
        t = complex(value)
        if not (math.isfinite(t.real) and math.isfinite(t.imag)):
            raise DivergenceError(
                f"series term {n} is not finite", n, _compensated(terms, is_complex), math.inf
            )
        terms.append(t)
        size = abs(t)

        if size == 0:
            zeros += 1
            if n + 1 >= spec.min_terms and zeros >= spec.zero_run:
                return _finish(terms, is_complex, 0.0)
            continue
        zeros = 0

        if last is None:
            last = size
            continue
        ratio = size / last

        if spec.ratio_guard and size > spec.tol:
            if seen_decrease and n >= spec.burn_in and size >= last:
                raise DivergenceError(
                    f"series terms grow again at index {n} (ratio {ratio:.3g})",
                    n,
                    _compensated(terms[:-1], is_complex),
                    last,
                )
            growing = ratio > 1 and last_ratio is not None and ratio > last_ratio
            growth_run = growth_run + 1 if growing else 0
            if growth_run >= spec.burn_in:
                raise DivergenceError(
                    f"series terms grow without bound at index {n} (ratio {ratio:.3g})",
                    n,
                    _compensated(terms[:-1], is_complex),
                    last,
                )
        if size < last:
            seen_decrease = True
        last, last_ratio = size, ratio

        if n + 1 >= spec.min_terms and size <= spec.tol and ratio < 1:
            tail = size * ratio / (1 - ratio)
            if tail <= spec.tol:
                return _finish(terms, is_complex, tail + size)

    raise ConvergenceError(
        f"series did not converge within {spec.max_terms} terms",
        _compensated(terms, is_complex),
        last if last is not None else math.inf,
    )


def _finish(terms: Sequence[complex], is_complex: bool, bound: float) -> EvalResult:
    total = _compensated(terms, is_complex)
    rounding = 4 * np.finfo(float).eps * math.fsum(abs(x) for x in terms)
    return EvalResult(total, float(bound + rounding), "series")


def _compensated(terms: Sequence[complex], is_complex: bool) -> complex | float:
    real = math.fsum(t.real for t in terms)
    if not is_complex:
        return real
    return complex(real, math.fsum(t.imag for t in terms))


def gen_binomial(a: float, k: int) -> float:
    """Generalized binomial coefficient ``a (a-1) ... (a-k+1) / k!``."""

    if k < 0:
        raise DomainError(f"binomial index must be >= 0, got {k}")
    result = 1.0
    for i in range(k):
        result *= (a - i) / (i + 1)
    return result


def log_gamma_half(k: int) -> float:
    """``log Γ(k + 1/2)`` from the recursion ``Γ(k+1/2) = (k-1/2) Γ(k-1/2)``."""

    if k < 0:
        raise DomainError(f"log_gamma_half index must be >= 0, got {k}")
    return math.fsum([_LOG_SQRT_PI, *(math.log(j - 0.5) for j in range(1, k + 1))])


def log_gamma_half_table(k_max: int) -> NDArray[np.float64]:
    """``log Γ(k + 1/2)`` for ``k = 0 .. k_max``."""

    steps = np.log(np.arange(1, k_max + 1) - 0.5)
    return np.concatenate(([_LOG_SQRT_PI], _LOG_SQRT_PI + np.cumsum(steps)))


def gauss_hermite_nodes(
    count: int, center: float = 0.0, width: float = 1.0
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Nodes and weights for ``∫ g(p) exp(-((p - center)/width)²) dp ≈ Σ w g(p)``."""

    if count < 1:
        raise DomainError(f"node count must be >= 1, got {count}")
    x, w = roots_hermite(count)
    return center + width * x, width * w


def thread_count(default: int | None = None) -> int:
    """Worker cap from ``FVCS_THREADS`` (falls back to ``default`` or the CPU count)."""

    raw = os.environ.get(THREADS_ENV_VAR)
    if raw is None or raw.strip() == "":
        return max(1, default if default is not None else min(8, os.cpu_count() or 1))
    try:
        value = int(raw)
    except ValueError as exc:
        raise ConfigError(THREADS_ENV_VAR, f"{THREADS_ENV_VAR} must be an integer, got '{raw}'") from exc
    if value < 1:
        raise ConfigError(THREADS_ENV_VAR, f"{THREADS_ENV_VAR} must be >= 1")
    return value


def parallel_map(fn: Callable[[T], R], items: Iterable[T], threads: int | None = None) -> list[R]:
    """Order-preserving map over ``items`` on up to ``threads`` workers."""

    items = list(items)
    workers = thread_count() if threads is None else max(1, threads)
    if workers == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))
