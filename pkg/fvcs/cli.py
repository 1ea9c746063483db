"""Command-line front end: ``fvcs <figure|verify|sweep>``.

Exit codes are ``0`` when everything passed, ``1`` for numeric failures
(failed checks, failed rows, library errors) and ``2`` for usage or
configuration errors. Once the parameters are loaded, every command writes
``manifest.json`` into ``--out``, also when it fails.
"""

from __future__ import annotations

import sys
from collections.abc import Callable, Iterator, Sequence
from contextlib import contextmanager
from contextvars import ContextVar
from pathlib import Path

from opentelemetry.trace import Tracer
from pydantic import BaseModel, Field, PrivateAttr, ValidationError
from pydantic_settings import (
    BaseSettings,
    CliApp,
    CliPositionalArg,
    CliSubCommand,
    SettingsConfigDict,
    SettingsError,
)

from .config import PhysicalParams, load_params
from .errors import ConfigError, FvcsError
from .figures import FigureId, write_figure
from .output import RunManifest, write_csv, write_manifest
from .sweep import run_sweep
from .tracing import RunTracer, debug_log, instrument_run
from .verify import Suite, Verifier

EXIT_OK = 0
EXIT_NUMERIC = 1
EXIT_USAGE = 2

_active_tracer: ContextVar[Tracer | None] = ContextVar("fvcs_tracer", default=None)

Body = Callable[[PhysicalParams, RunManifest], bool]


def _report(message: str) -> None:
    print(f"fvcs: error: {message}", file=sys.stderr, flush=True)


class _Command(BaseModel):
    config: Path | None = Field(None, description="TOML or JSON file with PhysicalParams values")
    out: Path = Field(Path("fvcs-out"), description="output directory")

    _exit_code: int = PrivateAttr(EXIT_OK)

    @property
    def exit_code(self) -> int:
        return self._exit_code

    def _load(self) -> PhysicalParams:
        if self.config is None:
            return PhysicalParams().validate()
        return load_params(self.config)

    def _execute(self, command: str, body: Body) -> None:
        try:
            params = self._load()
        except ConfigError as exc:
            _report(str(exc))
            self._exit_code = EXIT_USAGE
            return

        manifest = RunManifest(command, params.params_hash(), params.to_dict())
        run_tracer = RunTracer(tracer=_active_tracer.get())
        try:
            with run_tracer.command(command.split()[0], params):
                ok = body(params, manifest)
            self._exit_code = EXIT_OK if ok and manifest.ok else EXIT_NUMERIC
        except ConfigError as exc:
            manifest.errors.append(f"{type(exc).__name__}: {exc}")
            _report(str(exc))
            self._exit_code = EXIT_USAGE
        except FvcsError as exc:
            manifest.errors.append(f"{type(exc).__name__}: {exc}")
            _report(str(exc))
            self._exit_code = EXIT_NUMERIC
        except (ArithmeticError, ValueError) as exc:
            manifest.errors.append(f"{type(exc).__name__}: {exc}")
            _report(f"{type(exc).__name__}: {exc}")
            self._exit_code = EXIT_NUMERIC
        finally:
            path = write_manifest(manifest, self.out)
            debug_log("manifest", path=path, ok=manifest.ok, outputs=len(manifest.outputs))


class FigureCommand(_Command):
    """Write the data behind one of the six figures."""

    figure: CliPositionalArg[FigureId]
    preset: str | None = Field(None, description="named preset, e.g. a-d for fig3")

    def cli_cmd(self) -> None:
        def body(params: PhysicalParams, manifest: RunManifest) -> bool:
            output = write_figure(self.figure, params, self.out, self.preset)
            for path in output.paths:
                manifest.record_output(path)
            manifest.errors.extend(output.failures)
            return output.ok

        self._execute(f"figure {self.figure}", body)


class VerifyCommand(_Command):
    """Run a verification suite and record every check in the manifest."""

    suite: CliPositionalArg[Suite]

    def cli_cmd(self) -> None:
        def body(params: PhysicalParams, manifest: RunManifest) -> bool:
            verifier = Verifier(params)
            instrument_run(verifier, tracer=_active_tracer.get())
            manifest.checks.extend(verifier.run(self.suite))
            return verifier.ok

        self._execute(f"verify {self.suite}", body)


class SweepCommand(_Command):
    """Evaluate an observable on a Cartesian parameter grid."""

    grid: str = Field(description="sweep spec, e.g. 'lambda=0.1:0.3:3 alpha_im=0.25,0.5'")
    observable: str = Field(
        description="observable from the registry (v_bar, dq2, dr2, a_bar, v_z, wigner, effective_mass)"
    )

    def cli_cmd(self) -> None:
        def body(params: PhysicalParams, manifest: RunManifest) -> bool:
            table = run_sweep(self.grid, self.observable, params)
            manifest.record_output(write_csv(table, self.out / f"sweep_{self.observable}.csv"))
            manifest.errors.extend(table.failures)
            return table.ok

        self._execute(f"sweep {self.observable}", body)


class FvcsCLI(BaseSettings):
    """Relativistic coherent states: figure data, verification suites and sweeps."""

    model_config = SettingsConfigDict(cli_prog_name="fvcs", cli_exit_on_error=False, env_prefix="FVCS_")

    figure: CliSubCommand[FigureCommand]
    verify: CliSubCommand[VerifyCommand]
    sweep: CliSubCommand[SweepCommand]

    _exit_code: int = PrivateAttr(EXIT_OK)

    @property
    def exit_code(self) -> int:
        return self._exit_code

    def cli_cmd(self) -> None:
        """Run one of the subcommands."""
        command = CliApp.run_subcommand(self)
        self._exit_code = command.exit_code


@contextmanager
def _using_tracer(tracer: Tracer | None) -> Iterator[None]:
    token = _active_tracer.set(tracer)
    try:
        yield
    finally:
        _active_tracer.reset(token)


def main(argv: Sequence[str] | None = None, tracer: Tracer | None = None) -> int:
    """Parse ``argv`` (default ``sys.argv[1:]``), run the command and return the exit code.

    ``tracer`` replaces the module tracer for the command and check spans.
    """

    args = list(argv) if argv is not None else sys.argv[1:]
    with _using_tracer(tracer):
        try:
            cli = CliApp.run(FvcsCLI, cli_args=args)
        except (SettingsError, ValidationError) as exc:
            _report(str(exc))
            return EXIT_USAGE
    return cli.exit_code


def run() -> None:
    """Console-script entry point."""
    sys.exit(main())
