"""Figure data: presets and CSV writers for the six reference plots.

Every writer returns the files it produced and the per-row failures; the
CLI turns a non-empty failure list into a nonzero exit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, get_args

import numpy as np

from .config import CoherentLabel, PhysicalParams
from .errors import ConfigError
from .free_particle import FreeState, fig1_data, fig2_data
from .output import write_csv
from .rotator import build_state, fig3_data, fig3_presets, fig3_tau_grid, fig4_data
from .wigner import (
    FIG5_ALPHA,
    FIG5_LAMBDA,
    FIG6_ALPHA,
    FIG6_LAMBDA,
    grid_spec_for,
    wigner_free,
    wigner_rotator,
    write_grid,
)

FigureId = Literal["fig1", "fig2", "fig3", "fig4", "fig5", "fig6"]
FIGURES: tuple[str, ...] = get_args(FigureId)

FIG1_LAMBDAS = [0.1, 0.5, 1.0, 2.0]
FIG1_MOMENTA = np.linspace(0.0, 10.0, 201)
FIG2_ALPHA_IMS = [0.0, 0.5, 1.0, 2.0]
FIG2_SPREADS = np.linspace(0.05, 5.0, 100)
FIG4_OMEGAS = np.geomspace(1e-3, 10.0, 41)
FIG4_RADII = [0.0, 1.0, 2.0, 4.0]
GRID_POINTS = 121
DEFAULT_PRESET = "default"


@dataclass
class FigureOutput:
    paths: list[Path] = field(default_factory=list)
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def figure_presets(figure: str) -> tuple[str, ...]:
    """Preset names accepted by ``figure``; ``fig3`` has one per panel."""

    if figure not in FIGURES:
        raise ConfigError("figure", f"unknown figure '{figure}'; choose from {', '.join(FIGURES)}")
    if figure == "fig3":
        return (DEFAULT_PRESET, *sorted(fig3_presets()))
    return (DEFAULT_PRESET,)


def write_figure(
    figure: str,
    params: PhysicalParams,
    out_dir: Path,
    preset: str | None = None,
    threads: int | None = None,
) -> FigureOutput:
    """Write the data behind ``figure`` into ``out_dir``.

    Raises
    ------
    ConfigError
        For an unknown figure or preset.
    """

    chosen = preset or DEFAULT_PRESET
    if chosen not in figure_presets(figure):
        choices = ", ".join(figure_presets(figure))
        raise ConfigError("preset", f"unknown preset '{chosen}' for {figure}; choose from {choices}")
    output = FigureOutput()

    if figure == "fig1":
        table = fig1_data(FIG1_LAMBDAS, FIG1_MOMENTA, params.tol_quad, threads)
        output.paths.append(write_csv(table, out_dir / "fig1.csv"))
        output.failures.extend(table.failures)
    elif figure == "fig2":
        table = fig2_data(FIG2_ALPHA_IMS, FIG2_SPREADS, params.tol_quad, threads)
        output.paths.append(write_csv(table, out_dir / "fig2.csv"))
        output.failures.extend(table.failures)
    elif figure == "fig3":
        panels = sorted(fig3_presets()) if chosen == DEFAULT_PRESET else [chosen]
        for panel in panels:
            lam, q_mean, p_mean = fig3_presets()[panel]
            alpha = complex(q_mean, p_mean) / math.sqrt(2.0)
            table = fig3_data(lam, alpha, fig3_tau_grid(lam), params.n_max)
            output.paths.append(write_csv(table, out_dir / f"fig3_{panel}.csv"))
            output.failures.extend(table.failures)
    elif figure == "fig4":
        table = fig4_data(FIG4_OMEGAS, FIG4_RADII, threads)
        output.paths.append(write_csv(table, out_dir / "fig4.csv"))
        output.failures.extend(table.failures)
    elif figure == "fig5":
        label = CoherentLabel(FIG5_ALPHA)
        grid = wigner_free(FreeState(label, FIG5_LAMBDA), grid_spec_for(label, points=GRID_POINTS))
        output.paths.extend(write_grid(grid, out_dir / "fig5.csv"))
        if grid.meta["flagged"]:
            output.failures.append(f"{grid.meta['flagged']} grid points are not finite")
    else:
        label = CoherentLabel(FIG6_ALPHA)
        state = build_state(label, FIG6_LAMBDA, params.n_max)
        grid = wigner_rotator(state, grid_spec_for(label, points=GRID_POINTS))
        output.paths.extend(write_grid(grid, out_dir / "fig6.csv"))
    return output
