"""CSV/JSON metric export and import.

Floats are written with 17 significant digits so every value round-trips
exactly, and JSON is emitted by a small deterministic writer so repeated
exports of the same report are byte-identical.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

from .harness import FrameMetrics, Report, summarize

ROW_FIELDS = ("frame", "allocator", "trial", "total_time", "threat_sq_err", "bound", "product",
              "status", "nees")


def fmt_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".17g")


def _dump(obj, indent: int = 0) -> str:
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return fmt_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (list, tuple)):
        if all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in obj):
            return "[" + ", ".join(_dump(x) for x in obj) + "]"
        if not obj:
            return "[]"
        return "[\n" + ",\n".join(pad + _dump(x, indent + 1) for x in obj) + "\n" + end + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = (pad + json.dumps(str(k)) + ": " + _dump(v, indent + 1) for k, v in obj.items())
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _row_dict(r: FrameMetrics) -> dict:
    return {
        "frame": r.frame, "allocator": r.allocator, "trial": r.trial, "u": list(r.u),
        "total_time": r.total_time, "threat_sq_err": r.threat_sq_err, "bound": r.bound,
        "product": r.product, "status": r.status, "nees": r.nees,
    }


def report_to_json(report: Report) -> str:
    doc = {
        "scenario": report.scenario,
        "seed": report.seed,
        "trials": report.trials,
        "allocators": list(report.allocators),
        "n_radars": report.n_radars,
        "summary": summarize(report),
        "rows": [_row_dict(r) for r in report.rows],
    }
    return _dump(doc) + "\n"


def report_to_csv(report: Report) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    u_cols = [f"u_{i + 1}" for i in range(report.n_radars)]
    writer.writerow(["frame", "allocator", "trial", *u_cols, "total_time", "threat_sq_err",
                     "bound", "product", "status", "nees"])
    for r in report.rows:
        writer.writerow([r.frame, r.allocator, r.trial, *(fmt_float(x) for x in r.u),
                         fmt_float(r.total_time), fmt_float(r.threat_sq_err), fmt_float(r.bound),
                         fmt_float(r.product), r.status, fmt_float(r.nees)])
    return buf.getvalue()


def export_metrics(report: Report, path, format: str = "json") -> Path:
    path = Path(path)
    if format == "json":
        text = report_to_json(report)
    elif format == "csv":
        text = report_to_csv(report)
    else:
        raise ValueError(f"unknown format {format!r}")
    path.write_text(text)
    return path


def _row_from_dict(d: dict) -> FrameMetrics:
    return FrameMetrics(
        frame=int(d["frame"]), allocator=str(d["allocator"]), trial=int(d["trial"]),
        u=tuple(float(x) for x in d["u"]), total_time=float(d["total_time"]),
        threat_sq_err=float(d["threat_sq_err"]), bound=float(d["bound"]),
        product=float(d["product"]), status=str(d["status"]), nees=float(d["nees"]),
    )


def report_from_json(text: str) -> Report:
    doc = json.loads(text)
    return Report(doc["scenario"], int(doc["seed"]), int(doc["trials"]), tuple(doc["allocators"]),
                  int(doc["n_radars"]), [_row_from_dict(r) for r in doc["rows"]])


def report_from_csv(text: str, scenario: str = "", seed: int = 0) -> Report:
    reader = csv.DictReader(io.StringIO(text))
    u_cols = [c for c in reader.fieldnames or [] if c.startswith("u_")]
    rows = []
    for rec in reader:
        rec["u"] = [rec[c] for c in u_cols]
        rows.append(_row_from_dict(rec))
    allocators = tuple(dict.fromkeys(r.allocator for r in rows))
    trials = len({r.trial for r in rows})
    return Report(scenario, seed, trials, allocators, len(u_cols), rows)


def import_metrics(path) -> Report:
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".csv":
        return report_from_csv(text)
    return report_from_json(text)
