"""CSV / JSON / Markdown serialization of replay results."""

from __future__ import annotations

import csv
import json
import math
from typing import TextIO

from .criteria import Criterion
from .replay import CriterionRecord, ReplayConfig, ReplaySummary, StepRecord

CSV_FIELDS = (
    "step", "n", "m", "criterion", "fim_value", "graph_value", "rel_error",
    "bound_violated", "fim_time_ns", "graph_time_ns",
)
# column order of the Markdown results row
TABLE_CRITERIA = (Criterion.EMAX, Criterion.T, Criterion.D, Criterion.E)


def _num(x: float) -> str:
    return format(x, ".17g")


def _flag(v: bool | None) -> str:
    return "" if v is None else str(int(v))


def write_records_csv(records, stream: TextIO) -> None:
    """Long format: one row per criterion per step."""
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in records:
        for e in r.entries:
            w.writerow([
                r.step, r.n, r.m, e.criterion.value, _num(e.fim_value), _num(e.graph_value),
                _num(e.rel_error), _flag(e.bound_violated), e.fim_time_ns, e.graph_time_ns,
            ])


def read_records_csv(stream: TextIO) -> list[StepRecord]:
    rows = csv.DictReader(stream)
    if tuple(rows.fieldnames or ()) != CSV_FIELDS:
        raise ValueError(f"unexpected CSV header {rows.fieldnames}")
    grouped: dict[int, tuple[int, int, list]] = {}
    for row in rows:
        step = int(row["step"])
        flag = row["bound_violated"]
        entry = CriterionRecord(
            Criterion.parse(row["criterion"]),
            float(row["fim_value"]),
            float(row["graph_value"]),
            float(row["rel_error"]),
            None if flag == "" else bool(int(flag)),
            int(row["fim_time_ns"]),
            int(row["graph_time_ns"]),
        )
        grouped.setdefault(step, (int(row["n"]), int(row["m"]), []))[2].append(entry)
    return [StepRecord(s, n, m, tuple(es)) for s, (n, m, es) in grouped.items()]


def summary_dict(summary: ReplaySummary, config: ReplayConfig | None = None) -> dict:
    out = {
        "n": summary.n,
        "m": summary.m,
        "avg_degree": 2.0 * summary.m / summary.n,
        "fim_time_s": summary.fim_time_ns / 1e9,
        "graph_time_s": summary.graph_time_ns / 1e9,
        "time_reduction": summary.time_reduction,
        "criteria": {
            c.value: {
                "median_rel_error": s.median_rel_error,
                "max_rel_error": s.max_rel_error,
                "trend_agreement": None if math.isnan(s.trend_agreement) else s.trend_agreement,
                "bound_violations": s.bound_violations,
                "steps": s.steps,
            }
            for c, s in summary.criteria.items()
        },
    }
    if config is not None:
        out["config"] = {
            "criteria": [c.value for c in config.criteria],
            "weighting": config.weighting,
            "frame": "n/a" if config.weighting == "constant" else config.frame,
            "stride": config.stride,
            "start": config.start,
            "repetitions": config.repetitions,
        }
    return out


def write_summary_json(summary: ReplaySummary, stream: TextIO, config=None) -> None:
    json.dump(summary_dict(summary, config), stream, indent=2)
    stream.write("\n")


def write_summary_text(summary: ReplaySummary, stream: TextIO, config=None) -> None:
    if config is not None:
        frame = "n/a" if config.weighting == "constant" else config.frame
        stream.write(f"weighting={config.weighting} frame={frame} stride={config.stride}\n")
    stream.write(f"n={summary.n} m={summary.m} avg_degree={2.0 * summary.m / summary.n:.3f}\n")
    stream.write(f"{'criterion':<10}{'median_err%':>14}{'max_err%':>14}{'trend':>8}{'violations':>12}\n")
    for c, s in summary.criteria.items():
        stream.write(
            f"{c.label:<10}{100 * s.median_rel_error:>14.6g}{100 * s.max_rel_error:>14.6g}"
            f"{s.trend_agreement:>8.3f}{s.bound_violations:>12d}\n"
        )
    stream.write(
        f"t_fim={summary.fim_time_ns / 1e9:.3f}s t_graph={summary.graph_time_ns / 1e9:.3f}s "
        f"reduction={100 * summary.time_reduction:.1f}%\n"
    )


def markdown_row(summary: ReplaySummary, name: str = "dataset") -> str:
    """Header plus one row with n, m, d, errors (%), times (s) and reduction."""
    head = "| Dataset | n | m | d | ΔEmax | ΔT | ΔD | ΔE | t(Y) [s] | t(L) [s] | Δt |"
    sep = "|" + "---|" * 11

    def err(c):
        s = summary.criteria.get(c)
        return "-" if s is None else f"{100 * s.median_rel_error:.2f}%"

    cells = [
        name, str(summary.n), str(summary.m), f"{2.0 * summary.m / summary.n:.1f}",
        *(err(c) for c in TABLE_CRITERIA),
        f"{summary.fim_time_ns / 1e9:.2f}", f"{summary.graph_time_ns / 1e9:.2f}",
        f"{100 * summary.time_reduction:.1f}%",
    ]
    return "\n".join([head, sep, "| " + " | ".join(cells) + " |"])
