"""
MiniC Ast 格式化输出

二元表达式全部加括号, 重新解析输出得到结构相等的 Ast。
"""

from typing import List

from minic import ast_nodes as A
from minic.types import render_declaration

INDENT = "    "

_ATOMIC = (A.IntLit, A.CharLit, A.VarRef, A.FieldAccess, A.Index, A.Call)

_CHAR_NAMES = {10: "\\n", 9: "\\t", 13: "\\r", 0: "\\0", 92: "\\\\", 39: "\\'"}


def format_program(program: A.Program) -> str:
    parts: List[str] = []
    for decl in program.decls:
        if isinstance(decl, A.StructDecl):
            parts.append(format_struct(decl))
        elif isinstance(decl, A.VarDecl):
            parts.append(format_var_decl(decl) + "\n")
        else:
            parts.append(format_function(decl))
    return "\n".join(parts)


def format_struct(decl: A.StructDecl) -> str:
    lines = [f"struct {decl.name} {{"]
    for f in decl.fields:
        lines.append(f"{INDENT}{render_declaration(f.ctype, f.name)};")
    lines.append("};")
    return "\n".join(lines) + "\n"


def format_var_decl(decl: A.VarDecl) -> str:
    text = render_declaration(decl.ctype, decl.name)
    if decl.init is not None:
        text += f" = {format_expr(decl.init)}"
    return text + ";"


def format_function(func: A.FunctionDecl) -> str:
    params = ", ".join(render_declaration(p.ctype, p.name) for p in func.params)
    header = f"{render_declaration(func.return_type, func.name)}({params})"
    return header + " " + _block(func.body, 0) + "\n"


def _block(block: A.Block, depth: int) -> str:
    if not block.items:
        return "{ }"
    lines = ["{"]
    for item in block.items:
        lines.append(_item(item, depth + 1))
    lines.append(INDENT * depth + "}")
    return "\n".join(lines)


def _item(item, depth: int) -> str:
    pad = INDENT * depth
    if isinstance(item, A.VarDecl):
        return pad + format_var_decl(item)
    return pad + _stmt(item, depth)


def _stmt(stmt: A.Stmt, depth: int) -> str:
    if isinstance(stmt, A.Block):
        return _block(stmt, depth)
    if isinstance(stmt, A.Assign):
        return f"{format_expr(stmt.target)} = {format_expr(stmt.value)};"
    if isinstance(stmt, A.ExprStmt):
        return format_expr(stmt.expr) + ";"
    if isinstance(stmt, A.Print):
        return f"print({format_expr(stmt.value)});"
    if isinstance(stmt, A.Free):
        return f"free({format_expr(stmt.pointer)});"
    if isinstance(stmt, A.Return):
        if stmt.value is None:
            return "return;"
        return f"return {format_expr(stmt.value)};"
    if isinstance(stmt, A.If):
        text = f"if ({format_expr(stmt.cond)}) {_as_block(stmt.then, depth)}"
        if stmt.otherwise is not None:
            text += f" else {_as_block(stmt.otherwise, depth)}"
        return text
    if isinstance(stmt, A.While):
        return f"while ({format_expr(stmt.cond)}) {_as_block(stmt.body, depth)}"
    raise ValueError(f"cannot print {type(stmt).__name__}")


def _as_block(stmt: A.Stmt, depth: int) -> str:
    if isinstance(stmt, A.Block):
        return _block(stmt, depth)
    # keep a lone statement un-braced so the re-parsed tree is identical
    return "\n" + INDENT * (depth + 1) + _stmt(stmt, depth + 1)


def _wrap(expr: A.Expr) -> str:
    text = format_expr(expr)
    return text if isinstance(expr, _ATOMIC) else f"({text})"


def format_expr(expr: A.Expr) -> str:
    if isinstance(expr, A.IntLit):
        return str(expr.value)
    if isinstance(expr, A.CharLit):
        if expr.value in _CHAR_NAMES:
            return f"'{_CHAR_NAMES[expr.value]}'"
        if 32 <= expr.value < 127:
            return f"'{chr(expr.value)}'"
        return str(expr.value)
    if isinstance(expr, A.VarRef):
        return expr.name
    if isinstance(expr, A.FieldAccess):
        sep = "->" if expr.arrow else "."
        return f"{_wrap(expr.base)}{sep}{expr.field_name}"
    if isinstance(expr, A.Index):
        return f"{_wrap(expr.base)}[{format_expr(expr.index)}]"
    if isinstance(expr, A.AddrOf):
        return f"&{_wrap(expr.operand)}"
    if isinstance(expr, A.Deref):
        return f"*{_wrap(expr.operand)}"
    if isinstance(expr, A.Unary):
        return f"{expr.op}{_wrap(expr.operand)}"
    if isinstance(expr, A.Binary):
        return f"({format_expr(expr.left)} {expr.op} {format_expr(expr.right)})"
    if isinstance(expr, A.Call):
        return f"{expr.name}({', '.join(format_expr(a) for a in expr.args)})"
    if isinstance(expr, A.Malloc):
        size = f"sizeof({render_declaration(expr.element_type, '')})"
        if expr.count is None:
            return f"malloc({size})"
        return f"malloc({size} * {_wrap(expr.count)})"
    raise ValueError(f"cannot print {type(expr).__name__}")
