"""Parameter sweeps and deterministic CSV tables."""
from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .protocol import ProtocolConfig, run_protocol
from .scenario import SweepSpec, apply_axis

__all__ = ["OutputTable", "FIGURE_COLUMNS", "run_sweep", "emit_csv", "format_value", "default_jobs"]

FIGURE_COLUMNS = (
    "tau1_ns",
    "tau2_ns",
    "F_write",
    "F_store",
    "F_read",
    "var_write",
    "var_read",
    "squeezing_factor_read",
    "squeezing_factor_read_db",
    "E_N_write",
    "E_N_read",
    "backend_max_diff",
    "fallback",
    "failed",
)


def default_jobs() -> int:
    try:
        return max(1, len(os.sched_getaffinity(0)))
    except AttributeError:  # pragma: no cover - non-Linux
        return max(1, os.cpu_count() or 1)


@dataclass(frozen=True, eq=False)
class OutputTable:
    """Rectangular numeric table with ``#`` metadata lines."""

    columns: tuple
    rows: tuple = ()
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        rows = tuple(tuple(float(v) for v in row) for row in self.rows)
        for row in rows:
            if len(row) != len(self.columns):
                raise ValueError(f"row has {len(row)} values for {len(self.columns)} columns")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "columns", tuple(self.columns))

    def __len__(self):
        return len(self.rows)

    def column(self, name) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([row[i] for row in self.rows], dtype=float)

    def as_array(self) -> np.ndarray:
        return np.array(self.rows, dtype=float).reshape(len(self.rows), len(self.columns))


def format_value(x: float) -> str:
    """17 significant digits; ``nan``/``inf`` spelled out."""
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.17g}"


def emit_csv(table: OutputTable, destination) -> None:
    """Write ``table`` as CSV to a path or text stream.

    Metadata lines (``# key: value``) precede the header row.  Values use
    ``.`` as decimal separator and 17 significant digits, so a fixed table
    always serialises to the same bytes.
    """
    buf = io.StringIO(newline="")
    for key, value in table.metadata.items():
        buf.write(f"# {key}: {value}\r\n")
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([format_value(v) for v in row])
    text = buf.getvalue()
    if hasattr(destination, "write"):
        destination.write(text)
        return
    path = Path(destination)
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc.strerror or exc}") from exc


def _row_from_summary(summary) -> list:
    vals = dict(summary)
    vals["tau1_ns"] = summary["tau1"] * 1e9
    vals["tau2_ns"] = summary["tau2"] * 1e9
    vals["fallback"] = float(summary["fallback"])
    vals["failed"] = 0.0
    return [float(vals[c]) for c in FIGURE_COLUMNS]


def _evaluate_point(args):
    config, names, point = args
    try:
        cfg = config
        for name, value in zip(names, point):
            cfg = apply_axis(cfg, name, float(value))
        summary = run_protocol(replace(cfg, record_traces=False)).summary()
    except (ValueError, ArithmeticError, RuntimeError):
        # keep the grid rectangular: the point is reported as failed
        return [float(v) for v in point] + [np.nan] * (len(FIGURE_COLUMNS) - 1) + [1.0]
    return [float(v) for v in point] + _row_from_summary(summary)


def run_sweep(config: ProtocolConfig, sweep: SweepSpec, *, jobs: int = 1,
              metadata: dict | None = None) -> OutputTable:
    """Run the protocol on every grid point of ``sweep``.

    Rows are ordered lexicographically by the axis values and assembled in
    that order regardless of worker completion.  Points outside closed-form
    validity are computed numerically and flagged in the ``fallback`` column;
    points that cannot be evaluated at all are NaN with ``failed = 1``.
    """
    points = sweep.points()
    names = sweep.names
    tasks = [(config, names, p) for p in points]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
            rows = list(pool.map(_evaluate_point, tasks))
    else:
        rows = [_evaluate_point(t) for t in tasks]
    return OutputTable(names + FIGURE_COLUMNS, rows, dict(metadata or {}))
