"""OpenTelemetry spans for figure runs, verification checks and sweeps.

A :class:`RunTracer` wraps each CLI command in a span and each verification
check in a child span. Checks that fail mark their span as ``ERROR`` but do
not raise; the command span records the exception of any failure that
escapes the command body and re-raises it.

Setting ``FVCS_DEBUG_LOG=1`` additionally writes a delimited block per event
to stderr.
"""

from __future__ import annotations

import json
import os
import sys
from collections.abc import Iterator
from contextlib import contextmanager
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Any

from opentelemetry import trace
from opentelemetry.trace import Span, SpanKind, Status, StatusCode, Tracer

from .config import PhysicalParams
from .output import CheckRecord

DEBUG_ENV = "FVCS_DEBUG_LOG"


def debug_log(event: str, **fields: Any) -> None:
    """Write a debug block to stderr when ``FVCS_DEBUG_LOG=1``."""

    if os.environ.get(DEBUG_ENV) != "1":
        return

    timestamp = datetime.now(timezone.utc).isoformat()
    lines = ["=" * 80, f"[FVCS DEBUG] {timestamp}", f"Event: {event}"]
    if fields:
        lines.append("")
        for key in sorted(fields):
            lines.append(f"  {key}: {fields[key]}")
    else:
        lines.append("  (no fields)")
    lines.append("=" * 80)
    lines.append("")
    print("\n".join(lines), file=sys.stderr, flush=True)


@dataclass
class RunTracer:
    """Emit spans for commands and checks.

    Parameters
    ----------
    tracer:
        Optional OpenTelemetry tracer. When omitted, the module tracer is used.
    span_name_prefix:
        Prefix for span names, e.g. ``"fvcs."`` gives ``fvcs.command.figure``.
    span_kind:
        Kind of the emitted spans.
    record_exceptions:
        When True, exceptions escaping a command are recorded on its span and
        the status is set to ERROR before re-raising.
    record_successful_result:
        When True, attach ``fvcs.command.success = True`` on normal exit.
    include_params:
        When True, attach the parameter JSON as ``fvcs.params``. Off by default
        to keep spans small.
    """

    tracer: Tracer | None = None
    span_name_prefix: str = "fvcs."
    span_kind: SpanKind = SpanKind.INTERNAL
    record_exceptions: bool = True
    record_successful_result: bool = True
    include_params: bool = False

    def _tracer(self) -> Tracer:
        return self.tracer or trace.get_tracer(__name__)

    @contextmanager
    def command(self, name: str, params: PhysicalParams) -> Iterator[Span]:
        span_name = f"{self.span_name_prefix}command.{name}"
        debug_log("command", command=name, span_name=span_name, params_hash=params.params_hash())
        with self._tracer().start_as_current_span(
            span_name, kind=self.span_kind, record_exception=False, set_status_on_exception=False
        ) as span:
            span.set_attribute("fvcs.command", name)
            span.set_attribute("fvcs.params.hash", params.params_hash())
            if self.include_params:
                span.set_attribute("fvcs.params", json.dumps(params.to_dict(), sort_keys=True))
            try:
                yield span
            except Exception as exc:
                if self.record_exceptions:
                    span.record_exception(exc)
                    span.set_status(Status(StatusCode.ERROR, str(exc)))
                    span.set_attribute("fvcs.command.success", False)
                raise
            if self.record_successful_result:
                span.set_attribute("fvcs.command.success", True)

    @contextmanager
    def check(self, name: str) -> Iterator[Span]:
        with self._tracer().start_as_current_span(
            f"{self.span_name_prefix}check.{name}", kind=self.span_kind
        ) as span:
            span.set_attribute("fvcs.check.name", name)
            yield span

    def record_check(self, span: Span, check: CheckRecord) -> None:
        span.set_attribute("fvcs.check.name", check.name)
        span.set_attribute("fvcs.check.measured", float(check.measured))
        span.set_attribute("fvcs.check.tolerance", float(check.tolerance))
        span.set_attribute("fvcs.check.passed", check.passed)
        if check.detail:
            span.set_attribute("fvcs.check.detail", check.detail)
        if not check.passed:
            span.set_status(Status(StatusCode.ERROR, f"{check.name} exceeded tolerance"))
        debug_log(
            "check",
            name=check.name,
            measured=check.measured,
            tolerance=check.tolerance,
            passed=check.passed,
        )


def instrument_run(runner: Any, tracer: Tracer | None = None, **tracer_kwargs: Any) -> RunTracer:
    """Attach a :class:`RunTracer` to ``runner`` through its ``set_tracer`` method.

    Raises
    ------
    TypeError
        If ``runner`` has no callable ``set_tracer``.
    """

    run_tracer = RunTracer(tracer=tracer, **tracer_kwargs)
    set_tracer = getattr(runner, "set_tracer", None)
    if callable(set_tracer):
        set_tracer(run_tracer)
        return run_tracer

    raise TypeError(
        f"The provided runner does not have a 'set_tracer' method. Got runner type: {type(runner)}"
    )
