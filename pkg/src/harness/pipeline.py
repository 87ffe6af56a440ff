"""
源码到分析结果的流水线: parse -> typecheck -> lower -> analyze
"""

from dataclasses import dataclass
from typing import Optional

from config.logging_config import setup_logger
from dfi_ir.instructions import IRProgram
from dfi_ir.lowering import lower
from dfi_runtime.interpreter import RuntimeConfig, interpret
from dfi_runtime.report import ExecutionReport, RunMode
from fsdfi_errors import ConfigError
from minic.ast_nodes import Program, SourceProgram
from minic.parser import parse
from minic.typechecker import TypedProgram, typecheck
from vfa.analysis import AnalysisResult, analyze

logger = setup_logger()


@dataclass(frozen=True)
class LoadedProgram:
    ast: Program
    typed: TypedProgram
    ir: IRProgram

    @property
    def path(self) -> str:
        return self.ir.path


def read_source(path: str) -> SourceProgram:
    with open(path, "r", encoding="utf-8") as f:
        return SourceProgram(f.read(), path)


def load_program(source: SourceProgram) -> LoadedProgram:
    """
    解析、类型检查并降级一个 MiniC 程序

    Args:
        source (SourceProgram): 源码及其路径

    Returns:
        LoadedProgram: AST、类型化程序与 IR
    """
    try:
        ast = parse(source)
        typed = typecheck(ast)
        ir = lower(typed)
    except Exception as e:
        logger.error(f"Failed to load {source.path}: {e}")
        raise
    logger.debug(f"Lowered {source.path}: {sum(1 for _ in ir.instructions())} instructions")
    return LoadedProgram(ast, typed, ir)


def load_file(path: str) -> LoadedProgram:
    return load_program(read_source(path))


def analyze_program(loaded: LoadedProgram, strict_init: bool = False) -> AnalysisResult:
    return analyze(loaded.ir, strict_init=strict_init)


def resolve_mode(mode: RunMode, strict_init: bool) -> RunMode:
    """
    将 --strict-init 与 --mode 组合成实际运行模式

    protected 变为 strict-init; field-insensitive 保持不变 (改用 strict 表);
    baseline 不做检查, 与 strict-init 组合视为用法错误

    Raises:
        ConfigError: baseline 与 strict-init 同时指定
    """
    if not strict_init:
        return mode
    if mode is RunMode.BASELINE:
        raise ConfigError("baseline mode performs no checks and cannot be combined with strict-init")
    if mode is RunMode.PROTECTED:
        return RunMode.STRICT_INIT
    return mode


def run_mode(
    ir: IRProgram,
    mode: RunMode,
    inputs: Optional[dict] = None,
    analysis: Optional[AnalysisResult] = None,
    config: Optional[RuntimeConfig] = None,
    strict_init: bool = False,
) -> ExecutionReport:
    """
    在指定模式下运行程序, 按需补做分析 (strict-init 模式使用 strict 表)

    Args:
        ir: 已降级的程序
        mode: 运行模式
        inputs: 全局变量初值
        analysis: 已有的分析结果; 初始化策略与模式不符时重新分析
        strict_init: 使用不含 INITIAL 的合法集合 (见 resolve_mode)

    Returns:
        ExecutionReport: 执行报告
    """
    mode = resolve_mode(mode, strict_init)
    tables = None
    if mode.checks:
        wants_strict = strict_init or mode is RunMode.STRICT_INIT
        if analysis is None or analysis.tables.strict_init != wants_strict:
            analysis = analyze(ir, strict_init=wants_strict)
        tables = analysis.tables
    return interpret(ir, tables, mode, inputs, config)
