"""
执行报告模块

定义运行模式、执行结果、计数器以及执行报告。
"""

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional

from dfi_runtime.shadow import Violation


class RunMode(Enum):
    """
    运行模式枚举类 baseline, protected, field-insensitive, strict-init
    """

    BASELINE = "baseline"
    PROTECTED = "protected"
    FIELD_INSENSITIVE = "field-insensitive"
    STRICT_INIT = "strict-init"

    @staticmethod
    def from_string(value: str) -> Optional["RunMode"]:
        """
        从字符串创建运行模式枚举实例

        Args:
            value: 模式字符串

        Returns:
            Optional[RunMode]: 对应的枚举实例，如果不存在则返回None
        """
        for mode in RunMode:
            if mode.value == value.strip().lower():
                return mode
        return None

    @property
    def checks(self) -> bool:
        return self is not RunMode.BASELINE

    @property
    def field_sensitive(self) -> bool:
        return self in (RunMode.PROTECTED, RunMode.STRICT_INIT)


class Outcome(Enum):
    COMPLETED = "Completed"
    VIOLATION = "Violation"
    MEMORY_FAULT = "MemoryFault"
    RESOURCE_LIMIT = "ResourceLimit"

    @staticmethod
    def from_string(value: str) -> Optional["Outcome"]:
        for outcome in Outcome:
            if outcome.value.lower() == value.strip().lower():
                return outcome
        return None

    @property
    def exit_code(self) -> int:
        return {
            Outcome.COMPLETED: 0,
            Outcome.VIOLATION: 10,
            Outcome.MEMORY_FAULT: 11,
            Outcome.RESOURCE_LIMIT: 12,
        }[self]


@dataclass
class Counters:
    """
    执行计数器 (解释器确定性执行, 计数精确)

    Attributes:
        instructions: 执行的 IR 指令数
        loads_checked: 执行了合法性检查的读
        stores_recorded: 写入影子表的写
        peak_live_metadata_slots: 活动影子槽数峰值
        metadata_bytes: 影子表字节数峰值 (baseline 为 0)
        program_bytes: 活动程序数据字节数峰值
        per_byte_shadow_bytes: 假设按字节维护影子时的字节数
    """

    instructions: int = 0
    loads_executed: int = 0
    stores_executed: int = 0
    loads_checked: int = 0
    stores_recorded: int = 0
    live_metadata_slots: int = 0
    peak_live_metadata_slots: int = 0
    metadata_bytes: int = 0
    program_bytes: int = 0
    per_byte_shadow_bytes: int = 0

    def to_dict(self) -> Dict[str, int]:
        return {
            "instructions": self.instructions,
            "loads_executed": self.loads_executed,
            "stores_executed": self.stores_executed,
            "loads_checked": self.loads_checked,
            "stores_recorded": self.stores_recorded,
            "live_metadata_slots": self.live_metadata_slots,
            "peak_live_metadata_slots": self.peak_live_metadata_slots,
            "metadata_bytes": self.metadata_bytes,
            "program_bytes": self.program_bytes,
            "per_byte_shadow_bytes": self.per_byte_shadow_bytes,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Counters":
        return cls(**{k: int(v) for k, v in data.items()})


@dataclass
class ExecutionReport:
    """
    执行报告

    包含执行结果、违规详情、计数器以及 print 输出记录
    """

    program_path: str
    program_hash: str
    mode: RunMode
    outcome: Outcome = Outcome.COMPLETED
    transcript: List[int] = field(default_factory=list)
    counters: Counters = field(default_factory=Counters)
    violation: Optional[Violation] = None
    violations: List[Violation] = field(default_factory=list)
    diagnostic: Optional[str] = None
    fault: Optional[str] = None
    inputs: Dict[str, int] = field(default_factory=dict)

    @property
    def exit_code(self) -> int:
        return self.outcome.exit_code

    def to_dict(self) -> dict:
        """
        将执行报告转换为字典格式

        Returns:
            dict: 包含执行报告内容的字典
        """
        return {
            "program": {"path": self.program_path, "hash": self.program_hash},
            "mode": self.mode.value,
            "inputs": dict(sorted(self.inputs.items())),
            "outcome": self.outcome.value,
            "violation": self.violation.to_dict() if self.violation else None,
            "violations": [v.to_dict() for v in self.violations],
            "diagnostic": self.diagnostic,
            "fault": self.fault,
            "counters": self.counters.to_dict(),
            "transcript": list(self.transcript),
        }

    def to_json(self) -> str:
        """
        将执行报告转换为JSON字符串 (键有序, 便于逐字节比较)

        Returns:
            str: JSON格式的执行报告
        """
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "ExecutionReport":
        """
        从字典创建执行报告对象

        Args:
            data: 包含执行报告内容的字典

        Returns:
            ExecutionReport: 执行报告对象
        """
        violation = data.get("violation")
        return cls(
            program_path=data["program"]["path"],
            program_hash=data["program"]["hash"],
            mode=RunMode.from_string(data["mode"]),
            outcome=Outcome.from_string(data["outcome"]),
            transcript=list(data.get("transcript", [])),
            counters=Counters.from_dict(data.get("counters", {})),
            violation=Violation.from_dict(violation) if violation else None,
            violations=[Violation.from_dict(v) for v in data.get("violations", [])],
            diagnostic=data.get("diagnostic"),
            fault=data.get("fault"),
            inputs=dict(data.get("inputs", {})),
        )
