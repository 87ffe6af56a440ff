"""
fsdfi 工作流入口

    fsdfi analyze prog.c --emit tables.json [--emit-ir] [--emit-ast] [--check-oracle] [--strict-init]
    fsdfi run prog.c --mode protected|field-insensitive|baseline|strict-init [--tables tables.json]
              [--input k=v ...] [--log-continue] [--budget N] [--report out.json] [--emit-ir]
    fsdfi compare prog.c [--input k=v ...]
    fsdfi corpus [dir] --modes protected,field-insensitive,baseline --report report.json [--format json]

退出码: 0 正常完成, 10 违规, 11 内存错误, 12 超出预算, 2 用法错误, 1 其他错误
"""

import argparse
import logging
import sys
from typing import Dict, List, Optional

from config import config as cfg
from config.logging_config import set_console_level, setup_logger
from dfi_ir.text import format_ir
from dfi_runtime.interpreter import RuntimeConfig, interpret
from dfi_runtime.report import RunMode
from fsdfi_errors import ConfigError, FsdfiError, ReportFormatError, TableMismatch
from harness.compare import compare_modes
from harness.corpus import parse_modes, run_corpus
from harness.pipeline import analyze_program, load_file, resolve_mode, run_mode
from harness.report_writer import REPORT_FORMATS, emit_report, render_text
from minic.printer import format_program
from vfa.analysis import check_oracles, load_tables, write_tables

logger = setup_logger()

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2


def parse_inputs(items: Optional[List[str]]) -> Dict[str, int]:
    """
    解析 --input k=v 参数

    Raises:
        ConfigError: 格式不是 name=integer
    """
    inputs: Dict[str, int] = {}
    for item in items or []:
        name, sep, value = item.partition("=")
        if not sep or not name.strip():
            raise ConfigError(f"input '{item}' is not of the form name=value")
        try:
            inputs[name.strip()] = int(value.strip(), 0)
        except ValueError:
            raise ConfigError(f"input '{item}' does not have an integer value") from None
    return inputs


def _runtime_config(args) -> RuntimeConfig:
    budget = args.budget if args.budget is not None else cfg.budget_from_env()
    if budget <= 0:
        raise ConfigError(f"instruction budget must be positive, got {budget}")
    return RuntimeConfig(budget=budget, log_continue=getattr(args, "log_continue", False))


def cmd_analyze(args) -> int:
    loaded = load_file(args.program)
    if args.emit_ast:
        sys.stdout.write(format_program(loaded.ast))
    if args.emit_ir:
        sys.stdout.write(format_ir(loaded.ir))
    result = analyze_program(loaded, strict_init=args.strict_init)
    if args.emit:
        write_tables(result, args.emit)
    stats = result.stats()
    print(
        f"{loaded.path}: {stats['defs']} defs, {stats['uses']} uses, {stats['alloc_sites']} alloc sites, "
        f"{stats['distinct_sets']} distinct legal sets ({stats['distinct_sets_field_insensitive']} field-insensitive)"
    )
    if args.check_oracle:
        problems = check_oracles(result)
        for problem in problems:
            print(f"oracle mismatch: {problem}", file=sys.stderr)
        if problems:
            return EXIT_ERROR
        print("oracles agree")
    return EXIT_OK


def cmd_run(args) -> int:
    mode = resolve_mode(RunMode.from_string(args.mode), args.strict_init)
    inputs = parse_inputs(args.input)
    config = _runtime_config(args)
    loaded = load_file(args.program)
    if args.emit_ir:
        sys.stdout.write(format_ir(loaded.ir))
    if args.tables:
        tables = load_tables(args.tables)
        if args.strict_init and not tables.strict_init:
            raise TableMismatch(f"--strict-init needs tables from 'fsdfi analyze --strict-init', not {args.tables}")
        report = interpret(loaded.ir, tables, mode, inputs, config)
    else:
        report = run_mode(loaded.ir, mode, inputs, config=config, strict_init=args.strict_init)
    for value in report.transcript:
        print(value)
    if report.diagnostic:
        print(f"fsdfi: violation: {report.diagnostic}", file=sys.stderr)
    if report.fault:
        print(f"fsdfi: {report.outcome.value}: {report.fault}", file=sys.stderr)
    if args.report:
        emit_report(report, args.format, args.report)
    return report.exit_code


def cmd_compare(args) -> int:
    loaded = load_file(args.program)
    comparison = compare_modes(loaded.ir, parse_inputs(args.input), config=_runtime_config(args))
    for mode, report in comparison.reports.items():
        print(f"== {mode.value}")
        sys.stdout.write(render_text(report))
    if comparison.precision_gain:
        print("field-sensitive only: protected detected a violation that field-insensitive missed")
    return EXIT_OK


def cmd_corpus(args) -> int:
    modes = parse_modes(args.modes)
    report = run_corpus(args.directory, modes, _runtime_config(args), args.max_concurrent)
    if args.report:
        emit_report(report, args.format, args.report)
    totals = report.totals()
    print(
        f"{totals['cases']} cases ({totals['attacks']} attacks, {totals['benign']} benign), "
        + ", ".join(f"{m} detected {n}" for m, n in report.detections().items())
    )
    if report.precision_delta():
        print(f"field-sensitive only: {', '.join(report.precision_delta())}")
    for problem in report.mismatches:
        print(f"mismatch: {problem}", file=sys.stderr)
    return EXIT_OK if report.ok else EXIT_ERROR


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fsdfi", description="Field-sensitive data-flow integrity for MiniC")
    parser.add_argument(
        "--version",
        action="version",
        version=f"{cfg.TOOL_NAME} {cfg.TOOL_VERSION} (tables schema {cfg.TABLE_SCHEMA_VERSION})",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to the console")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="compute legal definition tables")
    p.add_argument("program")
    p.add_argument("--emit", metavar="TABLES", help="write tables.json")
    p.add_argument("--emit-ir", action="store_true")
    p.add_argument("--emit-ast", action="store_true")
    p.add_argument("--check-oracle", action="store_true", help="re-check against the naive solvers")
    p.add_argument("--strict-init", action="store_true", help="leave INITIAL out of legal sets")
    p.set_defaults(handler=cmd_analyze)

    p = sub.add_parser("run", help="execute a program")
    p.add_argument("program")
    p.add_argument("--mode", default=RunMode.PROTECTED.value, choices=[m.value for m in RunMode])
    p.add_argument("--strict-init", action="store_true", help="drop INITIAL from legal sets (protected becomes strict-init)")
    p.add_argument("--tables", help="tables.json from fsdfi analyze")
    p.add_argument("--input", action="append", metavar="NAME=VALUE")
    p.add_argument("--log-continue", action="store_true", help="record violations and keep running")
    p.add_argument("--budget", type=int)
    p.add_argument("--report")
    p.add_argument("--format", default="json", choices=["json", "text"])
    p.add_argument("--emit-ir", action="store_true")
    p.set_defaults(handler=cmd_run)

    p = sub.add_parser("compare", help="run baseline, field-insensitive and protected side by side")
    p.add_argument("program")
    p.add_argument("--input", action="append", metavar="NAME=VALUE")
    p.add_argument("--budget", type=int)
    p.set_defaults(handler=cmd_compare)

    p = sub.add_parser("corpus", help="run the attack/benign corpus")
    p.add_argument("directory", nargs="?", default=cfg.FSDFI_CORPUS_DIR)
    p.add_argument("--modes", default="protected,field-insensitive,baseline")
    p.add_argument("--report")
    # 未知格式在 emit_report 中报用法错误
    p.add_argument("--format", default="json", help=f"one of {', '.join(REPORT_FORMATS)}")
    p.add_argument("--budget", type=int)
    p.add_argument("--max-concurrent", type=int, default=cfg.FSDFI_MAX_CONCURRENT_CASES)
    p.set_defaults(handler=cmd_corpus)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if args.verbose:
        set_console_level(logging.INFO)
    try:
        return args.handler(args)
    except (TableMismatch, ReportFormatError, ConfigError) as e:
        logger.error(f"fsdfi {args.command} failed: {e}")
        print(f"fsdfi: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except FsdfiError as e:
        logger.error(f"fsdfi {args.command} failed: {e}")
        print(f"fsdfi: error: {e}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as e:
        logger.error(f"fsdfi {args.command} failed: {e}")
        print(f"fsdfi: error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
