"""MiniC 前端: parse, typecheck, compute_layout, flatten_fields"""

from minic.ast_nodes import Ast, Program, SourceProgram
from minic.layout import FieldSlot, LayoutCalculator, TypeLayout, compute_layout, flatten_fields
from minic.parser import parse, parse_text
from minic.typechecker import TypedProgram, typecheck

__all__ = [
    "Ast",
    "Program",
    "SourceProgram",
    "FieldSlot",
    "LayoutCalculator",
    "TypeLayout",
    "compute_layout",
    "flatten_fields",
    "parse",
    "parse_text",
    "TypedProgram",
    "typecheck",
]
