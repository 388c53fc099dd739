"""Delimited-text result files with appended summary comments.

Data rows use the schema path_id,seed,tau_1,...,tau_W,complete,correct,
wall_ms; missing stopping times are empty fields. Every float is
formatted with 10 significant digits so runs diff cleanly.
"""

from __future__ import annotations

import math

from betstream.harness.config import PathResult
from betstream.harness.experiments import ExperimentSummary

__all__ = ["fmt", "results_header", "write_results", "summary_lines"]


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float) and math.isnan(value):
        return ""
    return f"{value:.10g}"


def results_header(n_taus: int) -> str:
    taus = ",".join(f"tau_{i + 1}" for i in range(n_taus))
    return f"path_id,seed,{taus},complete,correct,wall_ms"


def summary_lines(summary: ExperimentSummary) -> list[str]:
    lines = [
        f"# n_paths={summary.n_paths} n_complete={summary.n_complete} "
        f"n_correct={summary.n_correct} anomalies={summary.anomalies}",
    ]
    for i, (mean, sd, se) in enumerate(
        zip(summary.mean_taus, summary.sd_taus, summary.se_taus), start=1
    ):
        lines.append(f"# tau_{i}: mean={fmt(mean)} sd={fmt(sd)} se={fmt(se)}")
    return lines


def write_results(
    path,
    results: list[PathResult],
    n_taus: int,
    summary: ExperimentSummary | None = None,
    include_timing: bool = False,
) -> None:
    """Write per-path rows plus '#' summary comments.

    Timing is zeroed unless requested so identical (config, seed) runs
    produce byte-identical files.
    """
    with open(path, "w") as fh:
        fh.write(results_header(n_taus) + "\n")
        for r in results:
            taus = list(r.taus[:n_taus]) + [None] * (n_taus - len(r.taus[:n_taus]))
            wall = r.wall_ms if include_timing else 0.0
            fields = (
                [str(r.path_id), str(r.seed)]
                + [fmt(t) for t in taus]
                + [fmt(r.complete), fmt(r.correct), fmt(wall)]
            )
            fh.write(",".join(fields) + "\n")
        if summary is not None:
            for line in summary_lines(summary):
                fh.write(line + "\n")
