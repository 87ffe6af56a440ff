"""
静态分析流程与 tables.json 持久化

analyze: validate_ir -> build_constraints -> solve_points_to -> compute_legal_defs
-> field_insensitive_projection -> compress_sets
"""

import json
from dataclasses import dataclass
from typing import List, Union

from config import config as cfg
from config.logging_config import setup_logger
from dfi_ir.instructions import IRProgram
from dfi_ir.sites import SiteCatalog, enumerate_sites
from dfi_ir.validate import validate_ir
from fsdfi_errors import TableMismatch
from vfa.compression import CompressedTable, compress_sets
from vfa.constraints import ConstraintSet, build_constraints
from vfa.legal_defs import (
    LegalDefTable,
    brute_force_legal_defs,
    compute_legal_defs,
    field_insensitive_projection,
)
from vfa.solver import PointsToSolution, solve_naive, solve_points_to

logger = setup_logger()


@dataclass(frozen=True)
class AnalysisTables:
    """
    运行时所需的分析结果, 通过 program_hash 绑定到具体的 IR

    Attributes:
        program_hash: IR 文本的 SHA-256
        strict_init: 集合中是否去掉了 INITIAL
        field_sensitive: 字段敏感压缩表 (protected / strict-init 模式)
        field_insensitive: 对象粒度压缩表 (field-insensitive 模式)
    """

    program_hash: str
    strict_init: bool
    field_sensitive: CompressedTable
    field_insensitive: CompressedTable

    def to_dict(self) -> dict:
        return {
            "program_hash": self.program_hash,
            "strict_init": self.strict_init,
            "field_sensitive": self.field_sensitive.to_dict(),
            "field_insensitive": self.field_insensitive.to_dict(),
        }


@dataclass(frozen=True)
class AnalysisResult:
    program: IRProgram
    catalog: SiteCatalog
    constraints: ConstraintSet
    solution: PointsToSolution
    legal: LegalDefTable
    legal_field_insensitive: LegalDefTable
    tables: AnalysisTables

    def stats(self) -> dict:
        fs, fi = self.tables.field_sensitive, self.tables.field_insensitive
        return {
            "defs": len(self.catalog.def_sites),
            "uses": len(self.catalog.use_sites),
            "alloc_sites": len(self.catalog.alloc_sites),
            "constraints": len(self.constraints),
            "legal_total_size": self.legal.total_size,
            "legal_total_size_field_insensitive": self.legal_field_insensitive.total_size,
            "distinct_sets": fs.set_count,
            "distinct_sets_field_insensitive": fi.set_count,
            "compressed_entries": fs.entry_count,
            "compressed_entries_field_insensitive": fi.entry_count,
        }

    def to_dict(self) -> dict:
        return {
            "schema_version": cfg.TABLE_SCHEMA_VERSION,
            "tool_version": cfg.TOOL_VERSION,
            "program": {"path": self.program.path, "hash": self.program.content_hash},
            "strict_init": self.tables.strict_init,
            "sites": self.catalog.to_dict(),
            "points_to": self.solution.to_dict(),
            "legal_defs": {
                "field_sensitive": self.legal.to_dict(),
                "field_insensitive": self.legal_field_insensitive.to_dict(),
            },
            "compressed": {
                "field_sensitive": self.tables.field_sensitive.to_dict(),
                "field_insensitive": self.tables.field_insensitive.to_dict(),
            },
            "stats": self.stats(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def analyze(prog: IRProgram, strict_init: bool = False) -> AnalysisResult:
    """
    对 IR 执行完整的编译期分析

    Args:
        prog (IRProgram): 已降级的程序
        strict_init (bool): 是否从合法集合中去掉 INITIAL

    Returns:
        AnalysisResult: 站点目录、指向集、合法定义表及压缩表
    """
    try:
        validate_ir(prog)
        catalog = enumerate_sites(prog)
        constraints = build_constraints(prog)
        solution = solve_points_to(constraints)
        legal = compute_legal_defs(prog, solution, strict_init)
        legal_fi = field_insensitive_projection(prog, solution, strict_init)
    except Exception as e:
        logger.error(f"Analysis of {prog.path} failed: {e}")
        raise
    tables = AnalysisTables(
        program_hash=prog.content_hash,
        strict_init=strict_init,
        field_sensitive=compress_sets(legal),
        field_insensitive=compress_sets(legal_fi),
    )
    logger.info(
        f"Analyzed {prog.path}: {len(catalog.def_sites)} defs, {len(catalog.use_sites)} uses, "
        f"{tables.field_sensitive.set_count} distinct legal sets"
    )
    return AnalysisResult(prog, catalog, constraints, solution, legal, legal_fi, tables)


def check_oracles(result: AnalysisResult) -> List[str]:
    """
    用朴素迭代与两两求交的方法复核分析结果

    Returns:
        List[str]: 不一致之处; 空列表表示一致
    """
    problems = []
    naive = solve_naive(result.constraints)
    if naive.pts != result.solution.pts:
        nodes = sorted({str(n) for n in set(naive.pts) | set(result.solution.pts)
                        if naive.points_to(n) != result.solution.points_to(n)})
        problems.append(f"points-to differs from the naive solver at {', '.join(nodes)}")
    brute = brute_force_legal_defs(result.program, result.solution, result.legal.strict_init)
    for use, (fast, slow) in enumerate(zip(result.legal.sets, brute.sets)):
        if fast != slow:
            problems.append(f"legal(u{use}) = {list(fast)} but pairwise intersection gives {list(slow)}")
    return problems


def write_tables(result: AnalysisResult, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(result.to_json())
    logger.info(f"Wrote analysis tables to {path}")


def load_tables(source: Union[str, dict]) -> AnalysisTables:
    """
    读取 tables.json (路径或已解析的字典)

    Raises:
        TableMismatch: 结构版本不一致或缺少字段
    """
    if isinstance(source, str):
        with open(source, "r", encoding="utf-8") as f:
            data = json.load(f)
    else:
        data = source
    version = str(data.get("schema_version"))
    if version != cfg.TABLE_SCHEMA_VERSION:
        raise TableMismatch(
            f"tables schema version {version} does not match {cfg.TABLE_SCHEMA_VERSION}"
        )
    try:
        return AnalysisTables(
            program_hash=data["program"]["hash"],
            strict_init=bool(data["strict_init"]),
            field_sensitive=CompressedTable.from_dict(data["compressed"]["field_sensitive"]),
            field_insensitive=CompressedTable.from_dict(data["compressed"]["field_insensitive"]),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise TableMismatch(f"malformed tables file: {e}") from None
