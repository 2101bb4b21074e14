"""Experiment reports and their JSON / CSV serializations.

JSON floats are written with 17 significant digits, which round-trips every
double exactly; CSV uses 12 for readability.  Key order is the insertion
order of the report, so identical runs give byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__

__all__ = ["CSV_HEADER", "ExperimentReport", "to_json", "to_csv", "emit_report"]

CSV_HEADER = ("n", "epsilon", "median", "upper_tail", "two_sided_tail", "bound", "pass")


@dataclass
class ExperimentReport:
    command: str
    config: dict
    records: list = field(default_factory=list)
    checks: list = field(default_factory=list)
    flags: list = field(default_factory=list)
    version: str = __version__
    wall_clock_seconds: float | None = None

    @property
    def passed(self) -> bool:
        return all(c["pass"] for c in self.checks)

    def to_dict(self) -> dict:
        out = {
            "command": self.command,
            "version": self.version,
            "config": self.config,
            "records": self.records,
            "summary": {
                "verdict": "PASS" if self.passed else "FAIL",
                "checks": len(self.checks),
                "failed": [c["name"] for c in self.checks if not c["pass"]],
                "flags": self.flags,
            },
        }
        if self.wall_clock_seconds is not None:
            out["wall_clock_seconds"] = self.wall_clock_seconds
        return out


def _plain(obj):
    """Convert numpy scalars and arrays to built-in types."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, float):
        if not math.isfinite(obj):
            raise ValueError(f"cannot serialize non-finite number {obj}")
        text = format(obj, ".17g")
        # Keep floats recognisable as floats after parsing.
        if not any(ch in text for ch in ".en"):
            text += ".0"
        return text
    return json.dumps(obj)


def to_json(report: ExperimentReport | dict) -> str:
    data = report.to_dict() if isinstance(report, ExperimentReport) else report
    return _encode(_plain(data), 2, 0) + "\n"


def _csv_rows(data: dict) -> list[dict]:
    return [r for r in data.get("records", []) if "epsilon" in r]


def _csv_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


def to_csv(report: ExperimentReport | dict) -> str:
    """One row per (n, epsilon) record; other record types are not tabulated."""
    data = report.to_dict() if isinstance(report, ExperimentReport) else report
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in _csv_rows(_plain(data)):
        writer.writerow([_csv_cell(r[c]) for c in CSV_HEADER])
    return buf.getvalue()


def emit_report(report: ExperimentReport | dict, fmt: str = "json", path: str | Path | None = None) -> str:
    """Render `report` and write it to `path` (``None`` or ``"-"`` returns it only).

    Raises
    ------
    OSError
        With the offending path in the message when the file cannot be written.
    """
    if fmt == "json":
        text = to_json(report)
    elif fmt == "csv":
        text = to_csv(report)
    else:
        raise ValueError(f"unknown output format {fmt!r}")
    if path is not None and str(path) != "-":
        try:
            Path(path).write_text(text)
        except OSError as exc:
            raise OSError(f"cannot write report to {path}: {exc.strerror or exc}") from exc
    return text
