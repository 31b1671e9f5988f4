"""Report serialization: lossless JSON documents and fixed-column CSV.

JSON is the round-trip format (load_report reconstructs the original
object); CSV flattens runs into one row per (axis value, protocol) with a
fixed column order so sweep outputs diff cleanly. Unbounded buffer caps
serialize as null in JSON and "inf" in CSV.
"""
from __future__ import annotations

import csv
import io
import json
import math
from typing import Union

from .engine import (ALL_MODES, SimReport, SweepReport, SweepRow, modes_for)
from .search import SearchResult

CSV_COLUMNS = (
    ["axis_value", "protocol", "tau_ul", "tau_dl", "tau_sum",
     "delivered_ul", "delivered_dl", "frac_coupled"]
    + [f"frac_{m}" for m in ALL_MODES]
    + ["lambda1", "lambda2", "lambda3", "lambda4",
       "drift_ul", "drift_dl", "frames", "seed"]
)


def _cap_out(cap: float):
    return None if math.isinf(cap) else cap


def _cap_in(raw) -> float:
    return math.inf if raw is None else float(raw)


def sim_report_to_dict(report: SimReport) -> dict:
    return {
        "kind": "sim_report",
        "protocol": report.protocol,
        "frames": report.frames,
        "seed": report.seed,
        "buffer_cap": _cap_out(report.buffer_cap),
        "lambda_star": list(report.lambda_star),
        "search_converged": report.search_converged,
        "search_iterations": report.search_iterations,
        "case_label": report.case_label,
        "tau_ul": report.tau_ul,
        "tau_dl": report.tau_dl,
        "tau_sum": report.tau_sum,
        "tau_sum_se": report.tau_sum_se,
        "delivered_ul": report.delivered_ul,
        "delivered_dl": report.delivered_dl,
        "mode_fractions": {m: report.mode_fractions[m]
                           for m in modes_for(report.protocol)},
        "mode_rate_sums": {m: list(report.mode_rate_sums[m])
                           for m in modes_for(report.protocol)},
        "coupled_fraction": report.coupled_fraction,
        "decoupled_fraction": report.decoupled_fraction,
        "queue_stats": dict(report.queue_stats),
        "arrival_ul": report.arrival_ul,
        "departure_ul": report.departure_ul,
        "arrival_dl": report.arrival_dl,
        "departure_dl": report.departure_dl,
        "drift_ul": report.drift_ul,
        "drift_dl": report.drift_dl,
        "conservation_ul": report.conservation_ul,
        "conservation_dl": report.conservation_dl,
    }


def sim_report_from_dict(data: dict) -> SimReport:
    return SimReport(
        protocol=data["protocol"],
        frames=data["frames"],
        seed=data["seed"],
        buffer_cap=_cap_in(data["buffer_cap"]),
        lambda_star=tuple(data["lambda_star"]),
        search_converged=data["search_converged"],
        search_iterations=data["search_iterations"],
        case_label=data["case_label"],
        tau_ul=data["tau_ul"],
        tau_dl=data["tau_dl"],
        tau_sum=data["tau_sum"],
        tau_sum_se=data["tau_sum_se"],
        delivered_ul=data["delivered_ul"],
        delivered_dl=data["delivered_dl"],
        mode_fractions=dict(data["mode_fractions"]),
        mode_rate_sums={m: list(v) for m, v in data["mode_rate_sums"].items()},
        coupled_fraction=data["coupled_fraction"],
        decoupled_fraction=data["decoupled_fraction"],
        queue_stats=dict(data["queue_stats"]),
        arrival_ul=data["arrival_ul"],
        departure_ul=data["departure_ul"],
        arrival_dl=data["arrival_dl"],
        departure_dl=data["departure_dl"],
        drift_ul=data["drift_ul"],
        drift_dl=data["drift_dl"],
        conservation_ul=data["conservation_ul"],
        conservation_dl=data["conservation_dl"],
    )


def sweep_report_to_dict(report: SweepReport) -> dict:
    return {
        "kind": "sweep_report",
        "axis": report.axis,
        "rows": [{"axis_value": _cap_out(row.axis_value),
                  "report": sim_report_to_dict(row.report)}
                 for row in report.rows],
    }


def sweep_report_from_dict(data: dict) -> SweepReport:
    return SweepReport(
        axis=data["axis"],
        rows=[SweepRow(axis_value=_cap_in(row["axis_value"]),
                       report=sim_report_from_dict(row["report"]))
              for row in data["rows"]],
    )


def search_result_to_dict(result: SearchResult) -> dict:
    return {
        "kind": "search_result",
        "protocol": result.protocol,
        "lambda_star": list(result.lambda_star),
        "iterations": result.iterations,
        "converged": result.converged,
        "case_label": result.case_label,
        "clamp_events": result.clamp_events,
        "drift_trace": [list(d) for d in result.drift_trace],
        "lambda_trace": [list(p) for p in result.lambda_trace],
    }


def search_result_from_dict(data: dict) -> SearchResult:
    return SearchResult(
        protocol=data["protocol"],
        lambda_star=tuple(data["lambda_star"]),
        iterations=data["iterations"],
        converged=data["converged"],
        case_label=data["case_label"],
        drift_trace=[tuple(d) for d in data["drift_trace"]],
        lambda_trace=[tuple(p) for p in data["lambda_trace"]],
        clamp_events=data["clamp_events"],
    )


def report_to_dict(report) -> dict:
    if isinstance(report, SimReport):
        return sim_report_to_dict(report)
    if isinstance(report, SweepReport):
        return sweep_report_to_dict(report)
    if isinstance(report, SearchResult):
        return search_result_to_dict(report)
    raise TypeError(f"unsupported report type: {type(report).__name__}")


def report_from_dict(data: dict):
    kind = data.get("kind")
    if kind == "sim_report":
        return sim_report_from_dict(data)
    if kind == "sweep_report":
        return sweep_report_from_dict(data)
    if kind == "search_result":
        return search_result_from_dict(data)
    raise ValueError(f"unrecognized report kind: {kind!r}")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return "inf" if math.isinf(value) else repr(value)
    return str(value)


def _sim_csv_row(report: SimReport, axis_value=None) -> list:
    lam = {"lambda1": None, "lambda2": None, "lambda3": None, "lambda4": None}
    if report.protocol == "nodba":
        lam["lambda3"], lam["lambda4"] = report.lambda_star
    else:
        # benchmark duals share the UL/DL column positions
        lam["lambda1"], lam["lambda2"] = report.lambda_star
    row = [
        _fmt(axis_value), report.protocol,
        _fmt(report.tau_ul), _fmt(report.tau_dl), _fmt(report.tau_sum),
        _fmt(report.delivered_ul), _fmt(report.delivered_dl),
        _fmt(report.coupled_fraction),
    ]
    applicable = set(modes_for(report.protocol))
    for m in ALL_MODES:
        row.append(_fmt(report.mode_fractions[m]) if m in applicable else "")
    row += [_fmt(lam["lambda1"]), _fmt(lam["lambda2"]),
            _fmt(lam["lambda3"]), _fmt(lam["lambda4"]),
            _fmt(report.drift_ul), _fmt(report.drift_dl),
            str(report.frames), str(report.seed)]
    return row


def render_csv(report) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    if isinstance(report, SimReport):
        writer.writerow(CSV_COLUMNS)
        writer.writerow(_sim_csv_row(report))
    elif isinstance(report, SweepReport):
        writer.writerow(CSV_COLUMNS)
        for row in report.rows:
            writer.writerow(_sim_csv_row(row.report, axis_value=row.axis_value))
    elif isinstance(report, SearchResult):
        writer.writerow(["iteration", "lambda_a", "lambda_b",
                         "drift_a", "drift_b"])
        for i, (lam, d) in enumerate(zip(report.lambda_trace,
                                         report.drift_trace)):
            writer.writerow([i, _fmt(lam[0]), _fmt(lam[1]),
                             _fmt(d[0]), _fmt(d[1])])
    else:
        raise TypeError(f"unsupported report type: {type(report).__name__}")
    return out.getvalue()


def render_json(report) -> str:
    return json.dumps(report_to_dict(report), indent=2) + "\n"


def write_report(report, path: str, fmt: str = "json") -> None:
    """Write a report file; fmt is "csv" or "json" (the round-trip form)."""
    if fmt == "csv":
        text = render_csv(report)
    elif fmt == "json":
        text = render_json(report)
    else:
        raise ValueError(f"unknown report format: {fmt!r}")
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc


def load_report(path: str) -> Union[SimReport, SweepReport, SearchResult]:
    """Read back a JSON report written by write_report."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise OSError(f"cannot read report from {path}: {exc}") from exc
    return report_from_dict(data)
