"""
报告输出: json / text (文本表格) / csv / xlsx

文本、csv 与 xlsx 每个用例一行, 列与 JSON 中的 cases 条目对应。
"""

import json
from typing import List, Union

import pandas as pd

from config.logging_config import setup_logger
from dfi_runtime.report import ExecutionReport
from fsdfi_errors import ReportFormatError
from harness.corpus import CorpusReport
from harness.overheads import aggregate_overheads

logger = setup_logger()

REPORT_FORMATS = ("json", "text", "csv", "xlsx")


def case_rows(report: CorpusReport) -> List[dict]:
    """
    将语料报告展开为逐用例的行

    Returns:
        List[dict]: 每个用例一行, 每个模式一列实际结果
    """
    rows = []
    for result in report.results:
        row = {"case": result.case.id, "category": result.case.category.value}
        for mode in report.modes:
            row[mode.value] = result.actual(mode).value
        row["match"] = all(result.matches(m) for m in report.modes)
        if result.overheads is not None:
            row["runtime_proxy"] = round(result.overheads.runtime_proxy, 6)
            row["memory_proxy"] = round(result.overheads.memory_proxy, 6)
        else:
            row["runtime_proxy"] = None
            row["memory_proxy"] = None
        rows.append(row)
    return rows


def summary_rows(report: CorpusReport) -> List[dict]:
    rows = [{"metric": f"detected[{mode}]", "value": count} for mode, count in report.detections().items()]
    rows.append({"metric": "precision_delta", "value": ", ".join(report.precision_delta())})
    for key, value in sorted(aggregate_overheads(report.overheads()).items()):
        rows.append({"metric": key, "value": value})
    for key, value in report.totals().items():
        rows.append({"metric": key, "value": value})
    return rows


def _frame(report: CorpusReport) -> pd.DataFrame:
    return pd.DataFrame(case_rows(report))


def render_text(report: Union[CorpusReport, ExecutionReport]) -> str:
    if isinstance(report, ExecutionReport):
        rows = [{"key": "outcome", "value": report.outcome.value}]
        if report.diagnostic:
            rows.append({"key": "diagnostic", "value": report.diagnostic})
        if report.fault:
            rows.append({"key": "fault", "value": report.fault})
        rows.extend({"key": k, "value": v} for k, v in report.counters.to_dict().items())
        return pd.DataFrame(rows).to_string(index=False) + "\n"
    return _frame(report).to_string(index=False) + "\n"


def emit_report(report: Union[CorpusReport, ExecutionReport], fmt: str, path: str) -> None:
    """
    按指定格式写出报告

    Args:
        report: 语料报告或单次执行报告
        fmt: json / text / csv / xlsx
        path: 输出文件路径

    Raises:
        ReportFormatError: 未知格式, 或单次执行报告请求了表格格式
    """
    fmt = fmt.strip().lower()
    if fmt not in REPORT_FORMATS:
        raise ReportFormatError(f"unknown report format '{fmt}' (choose from {', '.join(REPORT_FORMATS)})")
    try:
        if fmt == "json":
            with open(path, "w", encoding="utf-8") as f:
                f.write(report.to_json())
        elif fmt == "text":
            with open(path, "w", encoding="utf-8") as f:
                f.write(render_text(report))
        elif isinstance(report, ExecutionReport):
            raise ReportFormatError(f"format {fmt} is only available for corpus reports")
        elif fmt == "csv":
            _frame(report).to_csv(path, index=False, encoding="utf-8")
        else:
            with pd.ExcelWriter(path, engine="openpyxl") as writer:
                _frame(report).to_excel(writer, sheet_name="Cases", index=False)
                pd.DataFrame(summary_rows(report)).to_excel(writer, sheet_name="Summary", index=False)
    except ReportFormatError:
        raise
    except Exception as e:
        logger.error(f"Failed to write {fmt} report to {path}: {e}")
        raise
    logger.info(f"Wrote {fmt} report to {path}")


def read_json_report(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)
