"""Unit conventions, physical parameters and shared result types.

Everything inside fvcs works in natural units ħ = c = m = 1: momenta are in
``mc``, lengths in the Compton wavelength ``λ_c = ħ/mc``, energies in ``mc²``
and frequencies in ``mc²/ħ``. Time arguments are the dimensionless product
``τ = ωt``. The packet (or oscillator) length is not an independent knob:
``σ = 1/λ`` in ``λ_c`` units.

Config files map 1:1 onto :class:`PhysicalParams`. Both TOML and JSON are
accepted; the format is picked from the file suffix. Example TOML::

    lambda = 0.1
    omega = 0.01
    lambda_r = 0.1
    lambda_z = 0.05
    n_max = 64
    tol_quad = 1e-12
    tol_series = 1e-14
"""

from __future__ import annotations

import hashlib
import json
import math
import tomllib
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Literal

from .errors import ConfigError, DomainError

N_MAX_MINIMUM = 16
TOLERANCE_CEILING = 1e-3

EvalMethod = Literal["quadrature", "series", "matrix", "closed-form"]


@dataclass(frozen=True)
class PhysicalParams:
    """Dimensionless model constants.

    Parameters
    ----------
    lambda_:
        λ = λ_c/σ, ratio of the Compton wavelength to the packet length.
        Spelled ``lambda`` in config files.
    omega:
        Cyclotron frequency in ``mc²/ħ`` units.
    lambda_r, lambda_z:
        Localisation ratios of the rotational and longitudinal degrees of
        freedom of a particle in a magnetic field.
    n_max:
        Fock truncation (number of retained levels).
    tol_quad:
        Absolute quadrature tolerance.
    tol_series:
        Absolute series tail tolerance.
    """

    lambda_: float = 0.1
    omega: float = 0.01
    lambda_r: float = 0.1
    lambda_z: float = 0.1
    n_max: int = 64
    tol_quad: float = 1e-12
    tol_series: float = 1e-14

    @property
    def sigma(self) -> float:
        """Packet length in ``λ_c`` units."""
        return 1.0 / self.lambda_

    def validate(self) -> PhysicalParams:
        """Return ``self`` when every invariant holds, raise :class:`ConfigError` otherwise."""
        if not (math.isfinite(self.lambda_) and self.lambda_ > 0):
            raise ConfigError("lambda", "lambda must be > 0")
        if not (math.isfinite(self.omega) and self.omega >= 0):
            raise ConfigError("omega", "omega must be >= 0")
        for name in ("lambda_r", "lambda_z"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ConfigError(name, f"{name} must be >= 0")
        if int(self.n_max) != self.n_max:
            raise ConfigError("n_max", "n_max must be an integer")
        if self.n_max < N_MAX_MINIMUM:
            raise ConfigError("n_max", f"n_max below minimum {N_MAX_MINIMUM}")
        for name in ("tol_quad", "tol_series"):
            value = getattr(self, name)
            if not (0 < value <= TOLERANCE_CEILING):
                raise ConfigError(name, f"{name} must lie in (0, {TOLERANCE_CEILING:g}]")
        return self

    def with_changes(self, **changes: Any) -> PhysicalParams:
        """Copy with ``changes`` applied and re-validated."""
        if "lambda" in changes:
            changes["lambda_"] = changes.pop("lambda")
        return replace(self, **changes).validate()

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        data["lambda"] = data.pop("lambda_")
        return data

    def params_hash(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()


def validate(params: PhysicalParams) -> PhysicalParams:
    """Check ``params`` against the PhysicalParams invariants."""

    return params.validate()


def params_from_mapping(data: dict[str, Any]) -> PhysicalParams:
    """Build validated params from a config mapping (``lambda`` is the key for ``lambda_``)."""

    known = {f.name for f in fields(PhysicalParams)}
    kwargs: dict[str, Any] = {}
    for key, value in data.items():
        attr = "lambda_" if key == "lambda" else key
        if attr not in known:
            raise ConfigError(key, f"unknown config key '{key}'")
        kwargs[attr] = value
    try:
        params = PhysicalParams(**kwargs)
    except TypeError as exc:  # pragma: no cover - guarded by the key check above
        raise ConfigError("config", str(exc)) from exc
    return params.validate()


def load_params(path: str | Path) -> PhysicalParams:
    """Read a TOML or JSON config file into validated :class:`PhysicalParams`."""

    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ConfigError("config", f"cannot read config file {path}: {exc}") from exc
    suffix = path.suffix.lower()
    try:
        if suffix == ".toml":
            data = tomllib.loads(raw.decode())
        elif suffix == ".json":
            data = json.loads(raw)
        else:
            raise ConfigError("config", f"unsupported config format '{suffix}' (use .toml or .json)")
    except (tomllib.TOMLDecodeError, json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError("config", f"malformed config file {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config", "config file must hold a key/value table")
    return params_from_mapping(data)


@dataclass(frozen=True)
class CoherentLabel:
    """Complex coherent-state parameter α together with the charge sign."""

    alpha: complex
    charge: int = 1

    def __post_init__(self) -> None:
        if self.charge not in (1, -1):
            raise DomainError(f"charge must be +1 or -1, got {self.charge}")
        object.__setattr__(self, "alpha", complex(self.alpha))

    @property
    def re(self) -> float:
        return self.alpha.real

    @property
    def im(self) -> float:
        return self.alpha.imag

    @property
    def abs2(self) -> float:
        return abs(self.alpha) ** 2


def label_from_means(
    q_mean: float, p_mean: float, params: PhysicalParams, charge: int = 1
) -> CoherentLabel:
    """α′ = q̄/(√2σ), α″ = σp̄/√2 with q̄ in ``λ_c`` and p̄ in ``mc`` units."""

    sigma = params.sigma
    return CoherentLabel(
        complex(q_mean / (math.sqrt(2.0) * sigma), sigma * p_mean / math.sqrt(2.0)), charge
    )


def means_from_label(label: CoherentLabel, params: PhysicalParams) -> tuple[float, float]:
    """Inverse of :func:`label_from_means`: returns ``(q̄, p̄)``."""

    sigma = params.sigma
    return math.sqrt(2.0) * sigma * label.re, math.sqrt(2.0) * label.im / sigma


@dataclass(frozen=True)
class EvalResult:
    """Scalar value with an absolute error estimate and the method that produced it."""

    value: complex | float
    err_estimate: float
    method: EvalMethod

    def __post_init__(self) -> None:
        if not self.err_estimate >= 0:
            raise DomainError(f"err_estimate must be >= 0, got {self.err_estimate}")

    def within(self, tol: float) -> bool:
        return self.err_estimate <= tol
