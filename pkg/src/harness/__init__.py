"""语料执行, 模式对比, 开销代理指标与报告输出"""

from harness.compare import COMPARISON_MODES, ModeComparison, compare_modes
from harness.corpus import (
    DEFAULT_MODES,
    CaseResult,
    Category,
    CorpusCase,
    CorpusReport,
    load_corpus,
    parse_modes,
    run_case,
    run_corpus,
    run_corpus_async,
)
from harness.overheads import OverheadMetrics, aggregate_overheads, count_overheads
from harness.pipeline import LoadedProgram, analyze_program, load_file, load_program, read_source, run_mode
from harness.report_writer import REPORT_FORMATS, case_rows, emit_report, render_text

__all__ = [
    "COMPARISON_MODES",
    "ModeComparison",
    "compare_modes",
    "DEFAULT_MODES",
    "CaseResult",
    "Category",
    "CorpusCase",
    "CorpusReport",
    "load_corpus",
    "parse_modes",
    "run_case",
    "run_corpus",
    "run_corpus_async",
    "OverheadMetrics",
    "aggregate_overheads",
    "count_overheads",
    "LoadedProgram",
    "analyze_program",
    "load_file",
    "load_program",
    "read_source",
    "run_mode",
    "REPORT_FORMATS",
    "case_rows",
    "emit_report",
    "render_text",
]
