"""编译期阶段: 指向分析, 合法定义集合与压缩"""

from vfa.analysis import AnalysisResult, AnalysisTables, analyze, check_oracles, load_tables, write_tables
from vfa.compression import CompressedTable, compress_sets
from vfa.constraints import TOP, AbstractLoc, Constraint, ConstraintKind, ConstraintSet, build_constraints
from vfa.legal_defs import (
    INITIAL_DEF,
    LegalDefTable,
    abstract_locs_read,
    abstract_locs_written,
    brute_force_legal_defs,
    compute_legal_defs,
    field_insensitive_projection,
)
from vfa.solver import PointsToSolution, solve_naive, solve_points_to

__all__ = [
    "AnalysisResult",
    "AnalysisTables",
    "analyze",
    "check_oracles",
    "load_tables",
    "write_tables",
    "CompressedTable",
    "compress_sets",
    "TOP",
    "AbstractLoc",
    "Constraint",
    "ConstraintKind",
    "ConstraintSet",
    "build_constraints",
    "INITIAL_DEF",
    "LegalDefTable",
    "abstract_locs_read",
    "abstract_locs_written",
    "brute_force_legal_defs",
    "compute_legal_defs",
    "field_insensitive_projection",
    "PointsToSolution",
    "solve_naive",
    "solve_points_to",
]
