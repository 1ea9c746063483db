"""Cartesian parameter sweeps over a fixed registry of observables.

A sweep spec is a whitespace-separated list of ``name=values`` items where
``values`` is either ``start:stop:count`` (inclusive, evenly spaced) or a
comma-separated list, e.g. ``"lambda=0.1:0.3:3 alpha_im=0.25,0.5"``. Rows
follow ``itertools.product`` order with the first item outermost.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Callable, Mapping
from dataclasses import dataclass

import numpy as np

from .config import CoherentLabel, PhysicalParams
from .errors import ConfigError, FvcsError
from .free_particle import FreeState, coord_dispersion, effective_mass, mean_velocity_quad
from .magnetic import mean_vz_value
from .numerics import parallel_map
from .output import Table
from .rotator import build_state, evolve_mean_a, radius_stats
from .spectrum import SpectrumKind
from .wigner import wigner_free_at

SWEEP_PARAMETERS = ("lambda", "alpha_re", "alpha_im", "omega", "lambda_z", "p_z", "tau", "q", "p")

Point = Mapping[str, float]


@dataclass(frozen=True)
class Observable:
    columns: tuple[str, ...]
    evaluate: Callable[[Point, PhysicalParams], tuple[float, ...]]
    description: str


def _label(point: Point) -> CoherentLabel:
    return CoherentLabel(complex(point["alpha_re"], point["alpha_im"]))


def _v_bar(point: Point, params: PhysicalParams) -> tuple[float, ...]:
    return (float(mean_velocity_quad(FreeState(_label(point), point["lambda"]), params.tol_quad).value),)


def _dq2(point: Point, params: PhysicalParams) -> tuple[float, ...]:
    return (float(coord_dispersion(FreeState(_label(point), point["lambda"]), params.tol_quad).value),)


def _dr2(point: Point, params: PhysicalParams) -> tuple[float, ...]:
    return (radius_stats(SpectrumKind.rotator(point["lambda"]), _label(point).abs2).dispersion,)


def _a_bar(point: Point, params: PhysicalParams) -> tuple[float, ...]:
    state = build_state(_label(point), point["lambda"], params.n_max)
    value = complex(evolve_mean_a(state, [point["tau"]])[0])
    return value.real, value.imag


def _v_z(point: Point, params: PhysicalParams) -> tuple[float, ...]:
    return (mean_vz_value(point["p_z"], _label(point).abs2, point["lambda_z"], point["omega"]),)


def _wigner(point: Point, params: PhysicalParams) -> tuple[float, ...]:
    return (wigner_free_at(FreeState(_label(point), point["lambda"]), point["q"], point["p"]),)


def _effective_mass(point: Point, params: PhysicalParams) -> tuple[float, ...]:
    return (effective_mass(point["lambda"]),)


OBSERVABLES: dict[str, Observable] = {
    "v_bar": Observable(("v_bar",), _v_bar, "free-particle mean velocity (c)"),
    "dq2": Observable(("dq2",), _dq2, "free-particle coordinate dispersion (sigma^2)"),
    "dr2": Observable(("dr2",), _dr2, "rotator gyration-radius dispersion (sigma^2)"),
    "a_bar": Observable(("a_bar_re", "a_bar_im"), _a_bar, "rotator mean amplitude at tau"),
    "v_z": Observable(("v_z",), _v_z, "longitudinal mean velocity in a magnetic field (c)"),
    "wigner": Observable(("w",), _wigner, "free-particle Wigner function at (q, p)"),
    "effective_mass": Observable(("m_star",), _effective_mass, "effective mass (m)"),
}


def _parse_values(name: str, text: str) -> list[float]:
    try:
        if ":" in text:
            start, stop, count = text.split(":")
            bounds, points = (float(start), float(stop)), int(count)
        else:
            values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(name, f"cannot parse sweep values '{text}' for '{name}'") from exc
    if ":" in text:
        if points < 1:
            raise ConfigError(name, f"sweep count for '{name}' must be >= 1")
        return [float(v) for v in np.linspace(*bounds, points)]
    if not values:
        raise ConfigError(name, f"no sweep values for '{name}'")
    return values


def parse_sweep_spec(spec: str) -> dict[str, list[float]]:
    """Parse a sweep spec into ``{parameter: values}`` (insertion-ordered).

    Raises
    ------
    ConfigError
        For an empty spec, an unknown parameter or a malformed value list.
    """

    items = spec.split()
    if not items:
        raise ConfigError("grid", "empty sweep spec; expected items like 'lambda=0.1:0.3:3'")
    axes: dict[str, list[float]] = {}
    for item in items:
        name, sep, text = item.partition("=")
        if not sep:
            raise ConfigError("grid", f"sweep item '{item}' is not of the form name=values")
        if name not in SWEEP_PARAMETERS:
            choices = ", ".join(SWEEP_PARAMETERS)
            raise ConfigError(name, f"unknown sweep parameter '{name}'; choose from {choices}")
        if name in axes:
            raise ConfigError(name, f"sweep parameter '{name}' given twice")
        axes[name] = _parse_values(name, text)
    return axes


def get_observable(name: str) -> Observable:
    try:
        return OBSERVABLES[name]
    except KeyError:
        raise ConfigError(
            "observable", f"unknown observable '{name}'; registry: {', '.join(OBSERVABLES)}"
        ) from None


def _defaults(params: PhysicalParams) -> dict[str, float]:
    return {
        "lambda": params.lambda_,
        "alpha_re": 0.0,
        "alpha_im": 0.0,
        "omega": params.omega,
        "lambda_z": params.lambda_z,
        "p_z": 0.0,
        "tau": 0.0,
        "q": 0.0,
        "p": 0.0,
    }


def run_sweep(spec: str, observable: str, params: PhysicalParams, threads: int | None = None) -> Table:
    """Evaluate ``observable`` on the Cartesian grid of ``spec``.

    Rows whose evaluation raises a library error carry ``nan`` and a failure message.
    """

    axes = parse_sweep_spec(spec)
    chosen = get_observable(observable)
    names = list(axes)
    combos = list(itertools.product(*axes.values()))
    base = _defaults(params)

    def row(values: tuple[float, ...]) -> tuple[tuple[float, ...], str | None]:
        point = {**base, **dict(zip(names, values, strict=True))}
        try:
            return chosen.evaluate(point, params), None
        except (FvcsError, ArithmeticError) as exc:
            where = ", ".join(f"{n}={v!r}" for n, v in zip(names, values, strict=True))
            return tuple(math.nan for _ in chosen.columns), f"{where}: {exc}"

    table = Table([*names, *chosen.columns])
    for values, (result, failure) in zip(combos, parallel_map(row, combos, threads), strict=True):
        table.add(*values, *result)
        if failure is not None:
            table.failures.append(failure)
    return table
