"""
攻击/良性语料的加载、校验与并发执行

语料目录中每个 ``<name>.c`` 对应一个 ``<name>.expect.json``::

    {"cases": [{"id": "...", "category": "intra-struct-overflow",
                "input": {"n": 5}, "twin": "...",
                "expected": {"protected": "Violation", "field-insensitive": "Completed",
                             "baseline": "Completed"}}]}
"""

import asyncio
import json
import os
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

from config import config as cfg
from config.logging_config import setup_logger
from dfi_runtime.interpreter import RuntimeConfig
from dfi_runtime.report import ExecutionReport, Outcome, RunMode
from fsdfi_errors import CorpusError, FsdfiError
from harness.overheads import OverheadMetrics, aggregate_overheads, count_overheads
from harness.pipeline import LoadedProgram, load_file, run_mode
from vfa.analysis import analyze

logger = setup_logger()

EXPECT_SUFFIX = ".expect.json"
DEFAULT_MODES = (RunMode.PROTECTED, RunMode.FIELD_INSENSITIVE, RunMode.BASELINE)
REQUIRED_EXPECTATIONS = DEFAULT_MODES


class Category(Enum):
    """
    用例类别枚举类
    """

    INTRA_STRUCT_OVERFLOW = "intra-struct-overflow"
    ADJACENT_HEAP_OVERFLOW = "adjacent-heap-overflow"
    STACK_ADJACENT_OVERFLOW = "stack-adjacent-overflow"
    USE_AFTER_FREE = "use-after-free"
    WRONG_POINTER_WRITE = "wrong-pointer-write"
    BENIGN_TWIN = "benign-twin"

    @staticmethod
    def from_string(value: str) -> Optional["Category"]:
        """
        从字符串创建类别枚举实例

        Args:
            value: 类别字符串

        Returns:
            Optional[Category]: 对应的枚举实例，如果不存在则返回None
        """
        for category in Category:
            if category.value == str(value).strip().lower():
                return category
        return None

    @property
    def is_attack(self) -> bool:
        return self is not Category.BENIGN_TWIN


@dataclass(frozen=True)
class CorpusCase:
    """
    语料用例

    Attributes:
        id: 用例编号 (语料内唯一)
        category: 类别
        source: 源文件路径
        inputs: 全局变量初值
        expected: 各模式的预期结果
        twin: 对应的良性/攻击用例编号
        safe_input_ranges: 良性输入的取值范围 (闭区间), 用于随机化运行
    """

    id: str
    category: Category
    source: str
    inputs: Dict[str, int]
    expected: Dict[RunMode, Outcome]
    twin: Optional[str] = None
    safe_input_ranges: Dict[str, Tuple[int, int]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "category": self.category.value,
            "source": os.path.basename(self.source),
            "input": dict(sorted(self.inputs.items())),
            "twin": self.twin,
        }


@dataclass
class CaseResult:
    case: CorpusCase
    reports: Dict[RunMode, ExecutionReport] = field(default_factory=dict)
    overheads: Optional[OverheadMetrics] = None

    def actual(self, mode: RunMode) -> Outcome:
        return self.reports[mode].outcome

    def matches(self, mode: RunMode) -> bool:
        return self.case.expected.get(mode) is self.actual(mode)

    def detected(self, mode: RunMode) -> bool:
        return mode in self.reports and self.actual(mode) is Outcome.VIOLATION

    def to_dict(self) -> dict:
        results = {}
        for mode, report in self.reports.items():
            expected = self.case.expected.get(mode)
            results[mode.value] = {
                "expected": expected.value if expected else None,
                "actual": report.outcome.value,
                "match": self.matches(mode),
                "violations": len(report.violations),
                "diagnostic": report.diagnostic,
                "fault": report.fault,
                "transcript": list(report.transcript),
                "counters": report.counters.to_dict(),
            }
        data = self.case.to_dict()
        data["results"] = results
        data["overheads"] = self.overheads.to_dict() if self.overheads else None
        return data


@dataclass
class CorpusReport:
    """
    语料运行报告: 逐用例结果、各模式检出数、精度差列表以及开销汇总
    """

    directory: str
    modes: Tuple[RunMode, ...]
    results: List[CaseResult] = field(default_factory=list)

    @property
    def mismatches(self) -> List[str]:
        problems = []
        for r in self.results:
            for mode in self.modes:
                if not r.matches(mode):
                    expected = r.case.expected.get(mode)
                    problems.append(
                        f"{r.case.id} [{mode.value}]: expected "
                        f"{expected.value if expected else '?'}, got {r.actual(mode).value}"
                    )
        return problems

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def detections(self) -> Dict[str, int]:
        return {
            mode.value: sum(1 for r in self.results if r.case.category.is_attack and r.detected(mode))
            for mode in self.modes
        }

    def detected_ids(self, mode: RunMode) -> List[str]:
        return [r.case.id for r in self.results if r.detected(mode)]

    def precision_delta(self) -> List[str]:
        """protected 模式检出而 field-insensitive 模式漏检的用例"""
        if RunMode.PROTECTED not in self.modes or RunMode.FIELD_INSENSITIVE not in self.modes:
            return []
        return [
            r.case.id
            for r in self.results
            if r.detected(RunMode.PROTECTED) and not r.detected(RunMode.FIELD_INSENSITIVE)
        ]

    def false_positives(self) -> List[str]:
        return [
            f"{r.case.id} [{m.value}]"
            for r in self.results
            if not r.case.category.is_attack
            for m in self.modes
            if r.reports[m].violations
        ]

    def overheads(self) -> List[OverheadMetrics]:
        return [r.overheads for r in self.results if r.overheads is not None]

    def totals(self) -> Dict[str, int]:
        return {
            "cases": len(self.results),
            "attacks": sum(1 for r in self.results if r.case.category.is_attack),
            "benign": sum(1 for r in self.results if not r.case.category.is_attack),
            "runs": sum(len(r.reports) for r in self.results),
            "mismatches": len(self.mismatches),
        }

    def to_dict(self) -> dict:
        return {
            "schema_version": cfg.TABLE_SCHEMA_VERSION,
            "tool_version": cfg.TOOL_VERSION,
            "corpus": os.path.basename(os.path.normpath(self.directory)),
            "modes": [m.value for m in self.modes],
            "cases": [r.to_dict() for r in self.results],
            "detections": self.detections(),
            "precision_delta": self.precision_delta(),
            "false_positives": self.false_positives(),
            "mismatches": self.mismatches,
            "overheads": aggregate_overheads(self.overheads()),
            "totals": self.totals(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


# ---------------------------------------------------------------------------
# 加载与校验
# ---------------------------------------------------------------------------


def parse_modes(text: str) -> Tuple[RunMode, ...]:
    modes = []
    for item in text.split(","):
        if not item.strip():
            continue
        mode = RunMode.from_string(item)
        if mode is None:
            raise CorpusError(f"unknown mode '{item.strip()}'")
        if mode not in modes:
            modes.append(mode)
    if not modes:
        raise CorpusError("no modes requested")
    return tuple(modes)


def _parse_case(entry: dict, source: str, modes: Sequence[RunMode], problems: List[str]) -> Optional[CorpusCase]:
    where = os.path.basename(source)
    case_id = entry.get("id") if isinstance(entry, dict) else None
    if not case_id:
        problems.append(f"{where}: case without an id")
        return None
    category = Category.from_string(entry.get("category", ""))
    if category is None:
        problems.append(f"{case_id}: unknown category '{entry.get('category')}'")
        return None
    inputs = entry.get("input", {}) or {}
    if not isinstance(inputs, dict) or not all(
        isinstance(v, int) and not isinstance(v, bool) for v in inputs.values()
    ):
        problems.append(f"{case_id}: input must map global names to integers")
        return None
    expected: Dict[RunMode, Outcome] = {}
    for key, value in (entry.get("expected") or {}).items():
        mode, outcome = RunMode.from_string(key), Outcome.from_string(str(value))
        if mode is None or outcome is None:
            problems.append(f"{case_id}: bad expectation {key}={value}")
            return None
        expected[mode] = outcome
    missing = [m.value for m in (*REQUIRED_EXPECTATIONS, *modes) if m not in expected]
    if missing:
        problems.append(f"{case_id}: no expected outcome for {', '.join(dict.fromkeys(missing))}")
        return None
    ranges = {
        name: (int(bounds[0]), int(bounds[1]))
        for name, bounds in (entry.get("safe_input_ranges") or {}).items()
    }
    return CorpusCase(case_id, category, source, dict(inputs), expected, entry.get("twin"), ranges)


def load_corpus(directory: str, modes: Sequence[RunMode] = DEFAULT_MODES) -> Tuple[List[CorpusCase], Dict[str, LoadedProgram]]:
    """
    读取并校验整个语料目录, 在任何执行之前报告全部问题

    Args:
        directory: 语料目录
        modes: 将要运行的模式 (每个用例须有对应预期)

    Returns:
        Tuple[List[CorpusCase], Dict[str, LoadedProgram]]: 按编号排序的用例, 及源文件到已降级程序的映射

    Raises:
        CorpusError: 目录为空或存在格式错误的用例
    """
    if not os.path.isdir(directory):
        raise CorpusError(f"corpus directory {directory} does not exist")
    names = sorted(os.listdir(directory))
    sources = [n for n in names if n.endswith(".c")]
    if not sources:
        raise CorpusError(f"corpus directory {directory} contains no cases")

    problems: List[str] = []
    cases: List[CorpusCase] = []
    programs: Dict[str, LoadedProgram] = {}
    for name in names:
        if name.endswith(EXPECT_SUFFIX) and name[: -len(EXPECT_SUFFIX)] + ".c" not in sources:
            problems.append(f"{name}: no matching source file")

    for name in sources:
        source = os.path.join(directory, name)
        expect_path = source[:-2] + EXPECT_SUFFIX
        if not os.path.exists(expect_path):
            problems.append(f"{name}: missing {os.path.basename(expect_path)}")
            continue
        try:
            programs[source] = load_file(source)
        except FsdfiError as e:
            problems.append(f"{name}: {e}")
            continue
        try:
            with open(expect_path, "r", encoding="utf-8") as f:
                entries = json.load(f).get("cases", [])
        except (OSError, ValueError, AttributeError) as e:
            problems.append(f"{os.path.basename(expect_path)}: unreadable expectation file: {e}")
            continue
        if not entries:
            problems.append(f"{os.path.basename(expect_path)}: no cases")
        for entry in entries:
            case = _parse_case(entry, source, modes, problems)
            if case is not None:
                cases.append(case)

    by_id: Dict[str, CorpusCase] = {}
    for case in cases:
        if case.id in by_id:
            problems.append(f"{case.id}: duplicate case id")
        by_id[case.id] = case
    for case in cases:
        if case.category.is_attack:
            twin = by_id.get(case.twin) if case.twin else None
            if twin is None or twin.category.is_attack or twin.source != case.source:
                problems.append(f"{case.id}: attack case needs a benign twin in the same program")

    if problems:
        logger.error(f"Corpus {directory} has {len(problems)} problem(s)")
        raise CorpusError(f"malformed corpus {directory}", problems)
    cases.sort(key=lambda c: c.id)
    logger.info(f"Loaded corpus {directory}: {len(cases)} cases from {len(sources)} programs")
    return cases, programs


# ---------------------------------------------------------------------------
# 执行
# ---------------------------------------------------------------------------


def run_case(
    case: CorpusCase,
    loaded: LoadedProgram,
    modes: Sequence[RunMode],
    config: Optional[RuntimeConfig] = None,
) -> CaseResult:
    """
    在每个请求的模式下运行单个用例 (同一程序的分析结果在模式间共享)

    Returns:
        CaseResult: 各模式的执行报告及开销指标
    """
    result = CaseResult(case)
    analysis = analyze(loaded.ir) if any(m.checks and m is not RunMode.STRICT_INIT for m in modes) else None
    for mode in modes:
        report = run_mode(loaded.ir, mode, case.inputs, analysis, config)
        result.reports[mode] = report
        if not result.matches(mode):
            logger.warning(
                f"Case {case.id} [{mode.value}]: expected {case.expected[mode].value}, got {report.outcome.value}"
            )
    baseline, protected = result.reports.get(RunMode.BASELINE), result.reports.get(RunMode.PROTECTED)
    if (
        baseline is not None
        and protected is not None
        and baseline.outcome is Outcome.COMPLETED
        and protected.outcome is Outcome.COMPLETED
    ):
        result.overheads = count_overheads(baseline, protected)
    return result


async def _run_case_async(
    case: CorpusCase,
    loaded: LoadedProgram,
    modes: Sequence[RunMode],
    config: Optional[RuntimeConfig],
    semaphore: asyncio.Semaphore,
) -> CaseResult:
    async with semaphore:
        return await asyncio.to_thread(run_case, case, loaded, modes, config)


async def run_corpus_async(
    directory: str,
    modes: Sequence[RunMode] = DEFAULT_MODES,
    config: Optional[RuntimeConfig] = None,
    max_concurrent_cases: int = cfg.FSDFI_MAX_CONCURRENT_CASES,
) -> CorpusReport:
    """
    并发运行语料; 报告按用例编号组装, 与并发调度顺序无关

    Args:
        directory: 语料目录
        modes: 运行模式
        config: 运行时配置
        max_concurrent_cases: 最大并发用例数

    Returns:
        CorpusReport: 语料运行报告

    Raises:
        CorpusError: 语料格式错误 (执行前), 或某个用例执行时抛出工具错误
    """
    modes = tuple(modes)
    cases, programs = load_corpus(directory, modes)
    semaphore = asyncio.Semaphore(max(1, max_concurrent_cases))
    tasks = [_run_case_async(c, programs[c.source], modes, config, semaphore) for c in cases]
    logger.info(f"Starting concurrent run of {len(tasks)} corpus cases...")
    results = await asyncio.gather(*tasks, return_exceptions=True)

    report = CorpusReport(directory, modes)
    failures = []
    for case, result in zip(cases, results):
        if isinstance(result, Exception):
            logger.error(f"Error running case {case.id}: {result}")
            failures.append(f"{case.id}: {result}")
            continue
        report.results.append(result)
    if failures:
        raise CorpusError(f"corpus run of {directory} failed", failures)

    logger.info(
        f"Corpus {directory}: {report.totals()['cases']} cases, detections {report.detections()}, "
        f"{len(report.mismatches)} mismatch(es)"
    )
    for problem in report.mismatches:
        logger.warning(f"Expectation mismatch: {problem}")
    return report


def run_corpus(
    directory: str,
    modes: Sequence[RunMode] = DEFAULT_MODES,
    config: Optional[RuntimeConfig] = None,
    max_concurrent_cases: int = cfg.FSDFI_MAX_CONCURRENT_CASES,
) -> CorpusReport:
    return asyncio.run(run_corpus_async(directory, modes, config, max_concurrent_cases))
