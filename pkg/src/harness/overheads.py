"""
计数器开销代理指标

runtime proxy = (instructions + loads_checked + stores_recorded)_protected / instructions_baseline - 1
memory proxy  = metadata_bytes / program_bytes
"""

from dataclasses import dataclass
from typing import Dict, List, Sequence

from dfi_runtime.report import ExecutionReport, Outcome, RunMode
from fsdfi_errors import MetricsError


@dataclass(frozen=True)
class OverheadMetrics:
    """
    单个用例的开销代理指标

    Attributes:
        program_path: 程序路径
        instructions: baseline 执行的指令数
        loads_checked: protected 模式下的读检查次数
        stores_recorded: protected 模式下的写记录次数
        metadata_bytes: 影子表字节数峰值
        program_bytes: 程序数据字节数峰值
        per_byte_shadow_bytes: 字节粒度影子所需字节数
    """

    program_path: str
    instructions: int
    checked_instructions: int
    loads_checked: int
    stores_recorded: int
    metadata_bytes: int
    program_bytes: int
    per_byte_shadow_bytes: int

    @property
    def runtime_proxy(self) -> float:
        return self.checked_instructions / self.instructions - 1

    @property
    def memory_proxy(self) -> float:
        return self.metadata_bytes / self.program_bytes if self.program_bytes else 0.0

    def to_dict(self) -> dict:
        return {
            "program": self.program_path,
            "instructions": self.instructions,
            "checked_instructions": self.checked_instructions,
            "loads_checked": self.loads_checked,
            "stores_recorded": self.stores_recorded,
            "metadata_bytes": self.metadata_bytes,
            "program_bytes": self.program_bytes,
            "per_byte_shadow_bytes": self.per_byte_shadow_bytes,
            "runtime_proxy": round(self.runtime_proxy, 6),
            "memory_proxy": round(self.memory_proxy, 6),
        }


def count_overheads(baseline: ExecutionReport, protected: ExecutionReport) -> OverheadMetrics:
    """
    计算 protected 相对 baseline 的开销代理指标

    Args:
        baseline: baseline 模式的执行报告
        protected: 同一程序、同一输入在检查模式下的执行报告

    Returns:
        OverheadMetrics: 开销指标

    Raises:
        MetricsError: 程序哈希或输入不一致, 模式不对, 或任一执行未正常完成
    """
    if baseline.program_hash != protected.program_hash:
        raise MetricsError(
            f"reports come from different programs ({baseline.program_path} vs {protected.program_path})"
        )
    if baseline.inputs != protected.inputs:
        raise MetricsError(f"reports for {baseline.program_path} were run with different inputs")
    if baseline.mode is not RunMode.BASELINE or not protected.mode.checks:
        raise MetricsError(
            f"expected a baseline and a checked report, got {baseline.mode.value} and {protected.mode.value}"
        )
    for report in (baseline, protected):
        if report.outcome is not Outcome.COMPLETED:
            raise MetricsError(
                f"{report.mode.value} run of {report.program_path} ended with {report.outcome.value}"
            )
    n = baseline.counters.instructions
    if n == 0:
        raise MetricsError(f"baseline run of {baseline.program_path} executed no instructions")
    c = protected.counters
    return OverheadMetrics(
        program_path=protected.program_path,
        instructions=n,
        checked_instructions=c.instructions + c.loads_checked + c.stores_recorded,
        loads_checked=c.loads_checked,
        stores_recorded=c.stores_recorded,
        metadata_bytes=c.metadata_bytes,
        program_bytes=c.program_bytes,
        per_byte_shadow_bytes=c.per_byte_shadow_bytes,
    )


def aggregate_overheads(metrics: Sequence[OverheadMetrics]) -> Dict[str, float]:
    """
    汇总多个用例: 总量之比 (加权平均), 因而落在单用例最小值与最大值之间

    Returns:
        Dict[str, float]: runtime_proxy / memory_proxy 及其最小、最大值
    """
    if not metrics:
        return {}
    runtime: List[float] = [m.runtime_proxy for m in metrics]
    memory: List[float] = [m.memory_proxy for m in metrics]
    total_n = sum(m.instructions for m in metrics)
    total_checked = sum(m.checked_instructions for m in metrics)
    total_meta = sum(m.metadata_bytes for m in metrics)
    total_program = sum(m.program_bytes for m in metrics)
    return {
        "cases": len(metrics),
        "runtime_proxy": round(total_checked / total_n - 1, 6),
        "runtime_proxy_min": round(min(runtime), 6),
        "runtime_proxy_max": round(max(runtime), 6),
        "memory_proxy": round(total_meta / total_program, 6) if total_program else 0.0,
        "memory_proxy_min": round(min(memory), 6),
        "memory_proxy_max": round(max(memory), 6),
        "metadata_bytes": total_meta,
        "per_byte_shadow_bytes": sum(m.per_byte_shadow_bytes for m in metrics),
    }
