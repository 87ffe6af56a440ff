"""
同一程序在 baseline, field-insensitive 与 protected 模式下的并列执行
"""

from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

from config.logging_config import setup_logger
from dfi_ir.instructions import IRProgram
from dfi_runtime.interpreter import RuntimeConfig
from dfi_runtime.report import ExecutionReport, Outcome, RunMode
from harness.pipeline import run_mode
from vfa.analysis import AnalysisResult, analyze

logger = setup_logger()

COMPARISON_MODES = (RunMode.BASELINE, RunMode.FIELD_INSENSITIVE, RunMode.PROTECTED)


@dataclass
class ModeComparison:
    program_path: str
    program_hash: str
    inputs: Dict[str, int]
    reports: Dict[RunMode, ExecutionReport] = field(default_factory=dict)

    @property
    def outcomes(self) -> Tuple[Outcome, ...]:
        """按 (baseline, field-insensitive, protected) 顺序的结果"""
        return tuple(self.reports[m].outcome for m in COMPARISON_MODES if m in self.reports)

    def outcome(self, mode: RunMode) -> Outcome:
        return self.reports[mode].outcome

    def detected(self, mode: RunMode) -> bool:
        return self.reports[mode].outcome is Outcome.VIOLATION

    @property
    def precision_gain(self) -> bool:
        """字段敏感模式检出而对象粒度模式漏检"""
        return self.detected(RunMode.PROTECTED) and not self.detected(RunMode.FIELD_INSENSITIVE)

    def to_dict(self) -> dict:
        return {
            "program": {"path": self.program_path, "hash": self.program_hash},
            "inputs": dict(sorted(self.inputs.items())),
            "outcomes": {m.value: r.outcome.value for m, r in self.reports.items()},
            "counters": {m.value: r.counters.to_dict() for m, r in self.reports.items()},
            "diagnostics": {m.value: r.diagnostic for m, r in self.reports.items() if r.diagnostic},
        }


def compare_modes(
    prog: IRProgram,
    inputs: Optional[Dict[str, int]] = None,
    analysis: Optional[AnalysisResult] = None,
    config: Optional[RuntimeConfig] = None,
    modes: Sequence[RunMode] = COMPARISON_MODES,
) -> ModeComparison:
    inputs = dict(inputs or {})
    if analysis is None or analysis.tables.strict_init:
        analysis = analyze(prog)
    comparison = ModeComparison(prog.path, prog.content_hash, inputs)
    for mode in modes:
        comparison.reports[mode] = run_mode(prog, mode, inputs, analysis, config)
    logger.info(
        f"Compared {prog.path}: "
        + ", ".join(f"{m.value}={r.outcome.value}" for m, r in comparison.reports.items())
    )
    return comparison
