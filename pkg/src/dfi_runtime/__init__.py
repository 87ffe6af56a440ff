"""运行时阶段: 分区内存, 字段粒度影子元数据, 带检查的解释器"""

from dfi_runtime.diagnostics import Diagnostic, diagnose, legal_writers_summary
from dfi_runtime.interpreter import Interpreter, RuntimeConfig, interpret
from dfi_runtime.memory import Allocation, MemoryImage, allocate, deallocate, init_memory, resolve_slots
from dfi_runtime.report import Counters, ExecutionReport, Outcome, RunMode
from dfi_runtime.shadow import INITIAL, RELEASED, ShadowTable, Violation, check_use, record_def

__all__ = [
    "Diagnostic",
    "diagnose",
    "legal_writers_summary",
    "Interpreter",
    "RuntimeConfig",
    "interpret",
    "Allocation",
    "MemoryImage",
    "allocate",
    "deallocate",
    "init_memory",
    "resolve_slots",
    "Counters",
    "ExecutionReport",
    "Outcome",
    "RunMode",
    "INITIAL",
    "RELEASED",
    "ShadowTable",
    "Violation",
    "check_use",
    "record_def",
]
