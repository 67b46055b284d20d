import csv
import io
import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cogradar.export import (export_metrics, fmt_float, import_metrics, report_from_csv,
                             report_from_json, report_to_csv, report_to_json)
from cogradar.harness import FrameMetrics, Report, compare


@pytest.fixture(scope="module")
def report():
    from conftest import small_scenario
    return compare(small_scenario(frames=3), trials=2)


def test_csv_columns(report):
    rows = list(csv.reader(io.StringIO(report_to_csv(report))))
    assert rows[0] == ["frame", "allocator", "trial", "u_1", "u_2", "u_3", "u_4", "total_time",
                       "threat_sq_err", "bound", "product", "status", "nees"]
    assert len(rows) == 1 + len(report.rows)


def test_json_round_trip_byte_identical(report, tmp_path):
    path = export_metrics(report, tmp_path / "r.json", "json")
    again = export_metrics(import_metrics(path), tmp_path / "r2.json", "json")
    assert path.read_bytes() == again.read_bytes()
    assert report_from_json(path.read_text()).rows == report.rows


def test_csv_round_trip_lossless(report, tmp_path):
    path = export_metrics(report, tmp_path / "r.csv", "csv")
    back = import_metrics(path)
    assert back.rows == report.rows
    assert report_to_csv(back) == path.read_text()


def test_json_is_valid_and_mirrors_rows(report):
    doc = json.loads(report_to_json(report))
    assert doc["trials"] == 2 and doc["allocators"] == ["socp", "knn"]
    first = doc["rows"][0]
    assert set(first) == {"frame", "allocator", "trial", "u", "total_time", "threat_sq_err",
                          "bound", "product", "status", "nees"}
    assert "product_wins" in doc["summary"]


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_seventeen_digits_round_trip(x):
    assert float(fmt_float(x)) == x


def test_non_finite_values_survive():
    row = FrameMetrics(1, "socp", 0, (0.025,), 0.025, 1.0, math.inf, 0.025, "infeasible", math.nan)
    rep = Report("x", 0, 1, ("socp",), 1, [row])
    back = report_from_json(report_to_json(rep)).rows[0]
    assert math.isinf(back.bound) and math.isnan(back.nees)
    back = report_from_csv(report_to_csv(rep)).rows[0]
    assert math.isinf(back.bound) and math.isnan(back.nees)


def test_unknown_format(report, tmp_path):
    with pytest.raises(ValueError):
        export_metrics(report, tmp_path / "r.xml", "xml")
