"""Deterministic CSV and JSON serialization of run results.

Floats are written with 17 significant digits so every value round-trips
exactly; two runs with the same configuration and seed produce byte-identical
files apart from the timestamp and runtime entries of the JSON summary.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .evolution import TrajectoryRecord

__all__ = [
    "TRAJECTORY_CSV_COLUMNS",
    "format_float",
    "write_trajectory_csv",
    "write_sweep_csv",
    "write_summary_json",
]

TRAJECTORY_CSV_COLUMNS = (
    "t",
    "D_system",
    "sigma",
    "bound_total",
    "bound_term1",
    "bound_term2",
    "D_env",
    "E_indist",
    "X_corr",
    "chi1_norm",
    "chi2_norm",
    "svn_system_1",
    "svn_system_2",
    "mutual_info_1",
    "mutual_info_2",
    "dIdt_1",
)

_RECORD_FIELDS = (
    "times",
    "d_system",
    "sigma",
    "bound_total",
    "bound_term1",
    "bound_term2",
    "d_env",
    "e_indist",
    "x_corr",
    "chi1_norm",
    "chi2_norm",
    "svn_system_1",
    "svn_system_2",
    "mutual_info_1",
    "mutual_info_2",
    "didt_1",
)


def format_float(x: float) -> str:
    return f"{float(x):.17g}"


def write_trajectory_csv(record: TrajectoryRecord, path: str | Path) -> None:
    columns = [np.asarray(getattr(record, name)) for name in _RECORD_FIELDS]
    lines = [",".join(TRAJECTORY_CSV_COLUMNS)]
    for i in range(record.n_times):
        lines.append(",".join(format_float(col[i]) for col in columns))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_sweep_csv(rows: list[dict], path: str | Path) -> None:
    header = ("j0_over_j", "b_over_j", "n_measure", "n_intervals", "status")
    lines = [",".join(header)]
    for row in rows:
        lines.append(
            ",".join(
                (
                    format_float(row["j0_over_j"]),
                    format_float(row["b_over_j"]),
                    format_float(row["n_measure"]) if row["n_measure"] is not None else "",
                    str(row["n_intervals"]) if row["n_intervals"] is not None else "",
                    row["status"],
                )
            )
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_summary_json(summary: dict, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
