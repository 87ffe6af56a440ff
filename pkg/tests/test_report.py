import json
import os
import shutil

import pandas as pd
import pytest

from conftest import CORPUS_DIR, run
from dfi_runtime.report import RunMode
from fsdfi_errors import ReportFormatError
from harness.corpus import run_corpus
from harness.report_writer import case_rows, emit_report, read_json_report, render_text


@pytest.fixture(scope="module")
def small_report(tmp_path_factory):
    directory = tmp_path_factory.mktemp("corpus")
    for name in ("intra_struct_array.c", "intra_struct_array.expect.json", "uaf_session.c", "uaf_session.expect.json"):
        shutil.copy(os.path.join(CORPUS_DIR, name), directory / name)
    return run_corpus(str(directory))


def test_json_report_reads_back(small_report, tmp_path):
    path = str(tmp_path / "report.json")
    emit_report(small_report, "json", path)
    data = read_json_report(path)
    assert data == json.loads(small_report.to_json())
    assert data["corpus"].startswith("corpus")
    assert data["modes"] == ["protected", "field-insensitive", "baseline"]
    assert [c["id"] for c in data["cases"]] == sorted(c["id"] for c in data["cases"])
    assert data["precision_delta"] == ["intra-struct-array"]


def test_text_report_has_one_row_per_case(small_report, tmp_path):
    path = str(tmp_path / "report.txt")
    emit_report(small_report, "text", path)
    with open(path, "r", encoding="utf-8") as f:
        lines = f.read().splitlines()
    assert len(lines) == 1 + len(small_report.results)
    assert lines[0].split()[:2] == ["case", "category"]


def test_csv_report(small_report, tmp_path):
    path = str(tmp_path / "report.csv")
    emit_report(small_report, "csv", path)
    frame = pd.read_csv(path)
    assert len(frame) == 4
    assert list(frame["protected"]) == [r["protected"] for r in case_rows(small_report)]


def test_xlsx_report_has_cases_and_summary(small_report, tmp_path):
    path = str(tmp_path / "report.xlsx")
    emit_report(small_report, "xlsx", path)
    sheets = pd.read_excel(path, sheet_name=None)
    assert set(sheets) == {"Cases", "Summary"}
    assert len(sheets["Cases"]) == 4
    assert "detected[protected]" in set(sheets["Summary"]["metric"])


def test_unknown_format_is_rejected(small_report, tmp_path):
    with pytest.raises(ReportFormatError):
        emit_report(small_report, "yaml", str(tmp_path / "report.yaml"))


def test_execution_report_formats(flagship_source, tmp_path):
    report = run(flagship_source, RunMode.PROTECTED, {"bound": 5})
    assert "Violation" in render_text(report)
    path = str(tmp_path / "run.json")
    emit_report(report, "json", path)
    assert read_json_report(path)["outcome"] == "Violation"
    with pytest.raises(ReportFormatError):
        emit_report(report, "csv", str(tmp_path / "run.csv"))
