"""
合法定义集合

``legal(u) = {d | written(d) & read(u) != {}}``, 非 strict-init 时另含保留编号 0 (INITIAL)。
field-insensitive 投影先把每个抽象位置放宽到整个分配对象。
"""

from collections import defaultdict
from dataclasses import dataclass
from typing import Callable, Dict, FrozenSet, Set, Tuple

from config.logging_config import setup_logger
from dfi_ir.instructions import IRProgram
from vfa.constraints import AbstractLoc, expand
from vfa.solver import PointsToSolution

logger = setup_logger()

INITIAL_DEF = 0


@dataclass(frozen=True)
class LegalDefTable:
    """
    合法定义表: use id -> 有序的 def id 集合

    Attributes:
        sets: 以 use id 为下标的合法集合
        strict_init: 为 True 时集合不含 INITIAL (0)
        granularity: "field" 或 "object"
    """

    sets: Tuple[Tuple[int, ...], ...]
    strict_init: bool = False
    granularity: str = "field"

    def __len__(self) -> int:
        return len(self.sets)

    def legal(self, use: int) -> Tuple[int, ...]:
        return self.sets[use]

    @property
    def total_size(self) -> int:
        return sum(len(s) for s in self.sets)

    def to_dict(self) -> dict:
        return {
            "granularity": self.granularity,
            "strict_init": self.strict_init,
            "total_size": self.total_size,
            "sets": [list(s) for s in self.sets],
        }


def abstract_locs_written(def_id: int, sol: PointsToSolution) -> FrozenSet[AbstractLoc]:
    """Store 可能写入的具体抽象位置, TOP 已展开"""
    addr = sol.def_addresses[def_id]
    return frozenset(t for loc in sol.points_to(addr) for t in expand(loc, sol.slot_counts))


def abstract_locs_read(use_id: int, sol: PointsToSolution) -> FrozenSet[AbstractLoc]:
    """Load 可能读取的具体抽象位置, TOP 已展开"""
    addr = sol.use_addresses[use_id]
    return frozenset(t for loc in sol.points_to(addr) for t in expand(loc, sol.slot_counts))


def _whole_object(loc: AbstractLoc) -> AbstractLoc:
    return loc.widened()


def _identity(loc: AbstractLoc) -> AbstractLoc:
    return loc


def _legal_sets(
    sol: PointsToSolution, strict_init: bool, project: Callable[[AbstractLoc], AbstractLoc]
) -> Tuple[Tuple[int, ...], ...]:
    writers: Dict[AbstractLoc, Set[int]] = defaultdict(set)
    for def_id in sorted(sol.def_addresses):
        for loc in abstract_locs_written(def_id, sol):
            writers[project(loc)].add(def_id)
    sets = []
    for use_id in range(len(sol.use_addresses)):
        legal: Set[int] = set() if strict_init else {INITIAL_DEF}
        for loc in abstract_locs_read(use_id, sol):
            legal |= writers.get(project(loc), set())
        sets.append(tuple(sorted(legal)))
    return tuple(sets)


def compute_legal_defs(prog: IRProgram, sol: PointsToSolution, strict_init: bool = False) -> LegalDefTable:
    """
    计算 ``prog`` 中每个 use 的字段敏感合法定义表

    Args:
        prog: 已降级程序
        sol: 指向分析结果
        strict_init: 为 True 时不加入 INITIAL

    Returns:
        LegalDefTable: 字段粒度的合法定义表
    """
    table = LegalDefTable(_legal_sets(sol, strict_init, _identity), strict_init, "field")
    logger.debug(f"Legal defs for {prog.path}: {len(table)} uses, total size {table.total_size}")
    return table


def field_insensitive_projection(
    prog: IRProgram, sol: PointsToSolution, strict_init: bool = False
) -> LegalDefTable:
    """
    以整个对象为粒度重新计算的合法集合, 逐点包含字段敏感表
    """
    table = LegalDefTable(_legal_sets(sol, strict_init, _whole_object), strict_init, "object")
    logger.debug(f"Object-granular legal defs for {prog.path}: total size {table.total_size}")
    return table


def brute_force_legal_defs(prog: IRProgram, sol: PointsToSolution, strict_init: bool = False) -> LegalDefTable:
    """参照实现: 逐对求每个 def 与每个 use 的交集"""
    written = {d: abstract_locs_written(d, sol) for d in sol.def_addresses}
    sets = []
    for use_id in range(len(sol.use_addresses)):
        read = abstract_locs_read(use_id, sol)
        legal = [d for d in sorted(written) if written[d] & read]
        if not strict_init:
            legal.insert(0, INITIAL_DEF)
        sets.append(tuple(legal))
    return LegalDefTable(tuple(sets), strict_init, "field")
