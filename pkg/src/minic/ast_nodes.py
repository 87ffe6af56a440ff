"""
MiniC 抽象语法树

节点不可变。源码位置以及类型检查填入的标注 (``ctype``, ``symbol``) 不参与相等比较,
因此打印后重新解析的 Ast 与原 Ast 相等。
"""

from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

from minic.types import CType


@dataclass(frozen=True)
class Pos:
    line: int
    column: int

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


@dataclass(frozen=True)
class SourceProgram:
    text: str
    path: str = "<input>"


@dataclass(frozen=True)
class Symbol:
    """已解析的变量 (全局变量、局部变量或参数)"""

    kind: str  # "global" | "local" | "param"
    name: str
    ctype: CType
    uid: int
    function: str = ""
    pos: Optional[Pos] = None


@dataclass(frozen=True)
class Node:
    pos: Optional[Pos] = field(default=None, compare=False, kw_only=True)


# ---------------------------------------------------------------------------
# Expressions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Expr(Node):
    ctype: Optional[CType] = field(default=None, compare=False, kw_only=True)


@dataclass(frozen=True)
class IntLit(Expr):
    value: int


@dataclass(frozen=True)
class CharLit(Expr):
    value: int


@dataclass(frozen=True)
class VarRef(Expr):
    name: str
    symbol: Optional[Symbol] = field(default=None, compare=False, kw_only=True)


@dataclass(frozen=True)
class FieldAccess(Expr):
    base: Expr
    field_name: str
    arrow: bool


@dataclass(frozen=True)
class Index(Expr):
    base: Expr
    index: Expr


@dataclass(frozen=True)
class AddrOf(Expr):
    operand: Expr


@dataclass(frozen=True)
class Deref(Expr):
    operand: Expr


@dataclass(frozen=True)
class Unary(Expr):
    op: str
    operand: Expr


@dataclass(frozen=True)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Call(Expr):
    name: str
    args: Tuple[Expr, ...] = ()


@dataclass(frozen=True)
class Malloc(Expr):
    element_type: CType
    count: Optional[Expr] = None


# ---------------------------------------------------------------------------
# Declarations and statements
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VarDecl(Node):
    ctype: CType
    name: str
    init: Optional[Expr] = None
    symbol: Optional[Symbol] = field(default=None, compare=False, kw_only=True)


@dataclass(frozen=True)
class Stmt(Node):
    pass


@dataclass(frozen=True)
class Assign(Stmt):
    target: Expr
    value: Expr


@dataclass(frozen=True)
class ExprStmt(Stmt):
    expr: Call


@dataclass(frozen=True)
class If(Stmt):
    cond: Expr
    then: Stmt
    otherwise: Optional[Stmt] = None


@dataclass(frozen=True)
class While(Stmt):
    cond: Expr
    body: Stmt


@dataclass(frozen=True)
class Return(Stmt):
    value: Optional[Expr] = None


@dataclass(frozen=True)
class Free(Stmt):
    pointer: Expr


@dataclass(frozen=True)
class Print(Stmt):
    value: Expr


@dataclass(frozen=True)
class Block(Stmt):
    items: Tuple[Union[Stmt, VarDecl], ...] = ()


@dataclass(frozen=True)
class FieldDecl(Node):
    ctype: CType
    name: str


@dataclass(frozen=True)
class StructDecl(Node):
    name: str
    fields: Tuple[FieldDecl, ...]

    def lookup_field(self, name: str) -> Optional[FieldDecl]:
        for decl in self.fields:
            if decl.name == name:
                return decl
        return None


@dataclass(frozen=True)
class Param(Node):
    ctype: CType
    name: str
    symbol: Optional[Symbol] = field(default=None, compare=False, kw_only=True)


@dataclass(frozen=True)
class FunctionDecl(Node):
    return_type: CType
    name: str
    params: Tuple[Param, ...]
    body: Block


TopLevel = Union[StructDecl, VarDecl, FunctionDecl]


@dataclass(frozen=True)
class Program(Node):
    decls: Tuple[TopLevel, ...]
    path: str = field(default="<input>", compare=False)

    @property
    def structs(self) -> Tuple[StructDecl, ...]:
        return tuple(d for d in self.decls if isinstance(d, StructDecl))

    @property
    def globals(self) -> Tuple[VarDecl, ...]:
        return tuple(d for d in self.decls if isinstance(d, VarDecl))

    @property
    def functions(self) -> Tuple[FunctionDecl, ...]:
        return tuple(d for d in self.decls if isinstance(d, FunctionDecl))


# Ast is the parser's output type; the name mirrors the pipeline stage.
Ast = Program
