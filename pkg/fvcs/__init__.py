"""Relativistic coherent states of spin-0 charged particles.

The package computes spectra and ε/χ deformation factors, builds the
ε-deformed (nonlinear) coherent states of a free particle, a rotator and a
particle in a magnetic field, evaluates their mean values, dispersions and
charge-invariant Wigner functions, and cross-checks every result against an
independent method (series against quadrature, matrix algebra against closed
forms, nonrelativistic limits).
"""

__version__ = "0.1.0"

from .config import CoherentLabel, EvalResult, PhysicalParams, label_from_means, means_from_label
from .errors import (
    ConfigError,
    ConvergenceError,
    DivergenceError,
    DomainError,
    FvcsError,
    GridResolutionError,
    TruncationError,
)
from .spectrum import SpectrumKind
from .tracing import RunTracer, instrument_run

__all__ = [
    "__version__",
    "CoherentLabel",
    "ConfigError",
    "ConvergenceError",
    "DivergenceError",
    "DomainError",
    "EvalResult",
    "FvcsError",
    "GridResolutionError",
    "PhysicalParams",
    "RunTracer",
    "SpectrumKind",
    "TruncationError",
    "instrument_run",
    "label_from_means",
    "means_from_label",
]
