"""Run-directory layout: diagnostics CSV, criterion metadata and summaries.

A completed run directory holds::

    manifest.txt        copy of the manifest that produced the run
    diagnostics.csv     t, energy, enstrophy, vorticity_hm1_inf, <criterion ids>
    criteria.ini        one section per criterion plus [run] with the verdict
    summary.ini         aggregated criterion reports written by ``run``
    checkpoints/        snap_NNNNN.nsck, one per snapshot

``report`` rebuilds the aggregation from the CSV and ``criteria.ini`` alone.
"""
from __future__ import annotations

import configparser
import csv
import io
import math
from pathlib import Path

import numpy as np

from .criteria import (
    BlowupIndicator,
    CriterionReport,
    CriterionSpec,
    Target,
    blowup_from_series,
    report_from_series,
)
from .norms import NormSpec, SpatialKind, TimeSeries, Verdict

CSV_NAME = "diagnostics.csv"
CRITERIA_NAME = "criteria.ini"
SUMMARY_NAME = "summary.ini"
REPORT_NAME = "report.ini"
PLOT_NAME = "plot_diagnostics.gp"
BLOWUP_COLUMN = "vorticity_hm1_inf"


def _fmt(x: float) -> str:
    return f"{x:.16e}"


def write_csv(path: Path, diagnostics: dict[str, TimeSeries]) -> None:
    keys = list(diagnostics)
    times = diagnostics[keys[0]].times if keys else np.zeros(0)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", *keys])
    for i, t in enumerate(times):
        w.writerow([_fmt(t), *(_fmt(diagnostics[k].values[i]) for k in keys)])
    path.write_text(buf.getvalue())


def read_csv(path: Path) -> tuple[np.ndarray, dict[str, np.ndarray]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][0] != "t":
        raise ValueError(f"{path} is not a diagnostics CSV")
    header = rows[0]
    data = np.array([[float(x) for x in r] for r in rows[1:]], dtype=float).reshape(-1, len(header))
    return data[:, 0], {k: data[:, j] for j, k in enumerate(header) if j > 0}


def _pstr(p: float) -> str:
    return "inf" if math.isinf(p) else repr(float(p))


def write_criteria(path: Path, specs: list[CriterionSpec], verdict: Verdict, extra: dict[str, str]) -> None:
    cp = configparser.ConfigParser()
    cp["run"] = {"verdict": verdict.value, **extra}
    for s in specs:
        cp[f"criterion {s.id}"] = {
            "target": s.target.value,
            "spatial_kind": s.norm.spatial_kind.value,
            "p": _pstr(s.p),
            "sobolev_order": repr(s.norm.sobolev_order),
            "theta": repr(s.theta),
            "scaling_sum": repr(s.scaling_sum),
        }
    with open(path, "w") as fh:
        cp.write(fh)


def read_criteria(path: Path) -> tuple[list[CriterionSpec], Verdict]:
    cp = configparser.ConfigParser()
    cp.read_string(path.read_text())
    specs = []
    for name in cp.sections():
        if not name.startswith("criterion "):
            continue
        sec = cp[name]
        p = math.inf if sec["p"] == "inf" else float(sec["p"])
        norm = NormSpec(SpatialKind(sec["spatial_kind"]), p, float(sec["sobolev_order"]))
        specs.append(
            CriterionSpec(
                name[len("criterion "):],
                Target(sec["target"]),
                norm,
                float(sec["theta"]),
                float(sec["scaling_sum"]),
            )
        )
    return specs, Verdict(cp.get("run", "verdict", fallback="FINITE"))


def summarize(
    reports: list[CriterionReport], indicator: BlowupIndicator | None, verdict: Verdict
) -> str:
    cp = configparser.ConfigParser()
    run = {"verdict": verdict.value}
    if indicator is not None:
        sup = indicator.running_sup
        run["blowup_indicator_sup"] = _fmt(float(sup.values[-1])) if len(sup) else "nan"
        run["blowup_indicator_last_time"] = _fmt(float(sup.times[-1])) if len(sup) else "nan"
        run["blowup_indicator_samples"] = str(len(sup))
        run["blowup_indicator_verdict"] = (Verdict.DIVERGED if sup.diverged else Verdict.FINITE).value
    cp["run"] = run
    for r in reports:
        s = r.spec
        final = r.final_value.value if isinstance(r.final_value, Verdict) else _fmt(r.final_value)
        cp[f"criterion {s.id}"] = {
            "target": s.target.value,
            "spatial_kind": s.norm.spatial_kind.value,
            "sobolev_order": repr(s.norm.sobolev_order),
            "p": _pstr(s.p),
            "theta": repr(s.theta),
            "scaling_sum": repr(s.scaling_sum),
            "final_value": final,
            "verdict": r.verdict.value,
            "samples": str(len(r.instantaneous)),
        }
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def reports_from_dir(run_dir: Path) -> tuple[list[CriterionReport], BlowupIndicator | None, Verdict]:
    times, cols = read_csv(run_dir / CSV_NAME)
    specs, verdict = read_criteria(run_dir / CRITERIA_NAME)
    diverged = verdict is Verdict.DIVERGED
    reports = []
    for s in specs:
        series = TimeSeries.from_samples(times, cols[s.id])
        series = TimeSeries(series.times, series.values, diverged=series.diverged or diverged)
        reports.append(report_from_series(s, series))
    indicator = None
    if BLOWUP_COLUMN in cols:
        series = TimeSeries.from_samples(times, cols[BLOWUP_COLUMN])
        indicator = blowup_from_series(
            TimeSeries(series.times, series.values, diverged=series.diverged or diverged)
        )
    return reports, indicator, verdict


def plot_script(csv_name: str, columns: list[str]) -> str:
    lines = [
        "# gnuplot script: gnuplot -p plot_diagnostics.gp",
        "set datafile separator ','",
        "set key autotitle columnhead",
        "set xlabel 't'",
        "set logscale y",
        "plot \\",
    ]
    body = [f"  '{csv_name}' using 1:{j + 2} with lines title '{c}'" for j, c in enumerate(columns)]
    lines.append(", \\\n".join(body))
    return "\n".join(lines) + "\n"
