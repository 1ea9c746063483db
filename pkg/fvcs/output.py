"""Tables, CSV writing and run manifests.

Floats are written with ``repr`` (shortest round-trip form), so equal inputs
give byte-identical files.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

from . import __version__


@dataclass
class Table:
    """Column-oriented figure or sweep data.

    ``failures`` holds one message per row whose evaluation failed; such rows
    carry ``nan`` in the affected columns.
    """

    columns: list[str]
    rows: list[tuple[float, ...]] = field(default_factory=list)
    failures: list[str] = field(default_factory=list)

    def add(self, *values: float) -> None:
        if len(values) != len(self.columns):
            raise ValueError(f"row has {len(values)} values, table has {len(self.columns)} columns")
        self.rows.append(tuple(float(v) for v in values))

    def column(self, name: str) -> list[float]:
        index = self.columns.index(name)
        return [row[index] for row in self.rows]

    @property
    def ok(self) -> bool:
        return not self.failures


def format_float(value: float) -> str:
    if math.isnan(value):
        return "nan"
    return repr(float(value))


def write_csv(table: Table, path: Path) -> Path:
    """Write ``table`` with a header row; returns ``path``."""

    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(table.columns)
        for row in table.rows:
            writer.writerow([format_float(v) for v in row])
    return path


@dataclass
class CheckRecord:
    """Outcome of one verification check."""

    name: str
    measured: float
    tolerance: float
    passed: bool
    detail: str = ""

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        data["measured"] = None if not math.isfinite(self.measured) else self.measured
        return data


@dataclass
class RunManifest:
    """What a CLI run did and produced."""

    command: str
    params_hash: str
    params: dict[str, Any]
    version: str = __version__
    started_at: str = field(default_factory=lambda: _utc_now())
    finished_at: str | None = None
    outputs: list[str] = field(default_factory=list)
    checks: list[CheckRecord] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors and all(check.passed for check in self.checks)

    def record_output(self, path: Path) -> None:
        self.outputs.append(path.name)

    def to_dict(self) -> dict[str, Any]:
        return {
            "command": self.command,
            "params_hash": self.params_hash,
            "params": self.params,
            "version": self.version,
            "started_at": self.started_at,
            "finished_at": self.finished_at,
            "outputs": sorted(self.outputs),
            "checks": [check.to_dict() for check in self.checks],
            "errors": self.errors,
            "ok": self.ok,
        }


MANIFEST_NAME = "manifest.json"


def write_manifest(manifest: RunManifest, out_dir: Path) -> Path:
    """Write ``manifest.json`` into ``out_dir`` (the manifest lists itself)."""

    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / MANIFEST_NAME
    if MANIFEST_NAME not in manifest.outputs:
        manifest.outputs.append(MANIFEST_NAME)
    manifest.finished_at = _utc_now()
    path.write_text(json.dumps(manifest.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()
