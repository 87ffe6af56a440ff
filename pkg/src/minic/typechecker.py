"""
MiniC 类型检查

生成 ``TypedProgram``: Ast 的副本, 每个表达式带有 ``ctype``, 每个变量引用带有 ``Symbol``。
唯一的隐式转换是 int <-> char; 字面量 ``0`` 同时是空指针常量。
"""

from dataclasses import dataclass, field, replace
from typing import Dict, List, Mapping, Optional, Tuple

from config.logging_config import setup_logger
from fsdfi_errors import MiniCTypeError
from minic import ast_nodes as A
from minic.layout import LayoutCalculator
from minic.parser import BUILTINS
from minic.types import (
    CHAR,
    INT,
    VOID,
    ArrayType,
    CType,
    PointerType,
    StructType,
    VoidType,
)

logger = setup_logger()

ARITHMETIC_OPS = {"+", "-", "*", "/"}
COMPARISON_OPS = {"<", "<=", ">", ">=", "==", "!="}


@dataclass(frozen=True)
class TypedProgram:
    program: A.Program
    structs: Mapping[str, A.StructDecl]
    functions: Mapping[str, A.FunctionDecl]
    globals: Tuple[A.VarDecl, ...]
    path: str = "<input>"
    layouts: Optional[LayoutCalculator] = field(default=None, compare=False, repr=False)

    def function(self, name: str) -> A.FunctionDecl:
        return self.functions[name]


class _Scope:
    def __init__(self, parent: Optional["_Scope"] = None):
        self.parent = parent
        self.names: Dict[str, A.Symbol] = {}

    def lookup(self, name: str) -> Optional[A.Symbol]:
        scope = self
        while scope is not None:
            if name in scope.names:
                return scope.names[name]
            scope = scope.parent
        return None


def _null_literal(expr: A.Expr) -> bool:
    return isinstance(expr, A.IntLit) and expr.value == 0


def _is_lvalue(expr: A.Expr) -> bool:
    if isinstance(expr, A.VarRef):
        return True
    if isinstance(expr, A.FieldAccess):
        return expr.arrow or _is_lvalue(expr.base)
    if isinstance(expr, A.Index):
        return isinstance(expr.base.ctype, PointerType) or _is_lvalue(expr.base)
    return isinstance(expr, A.Deref)


def _is_scalar_param(expr: A.Expr) -> bool:
    return (
        isinstance(expr, A.VarRef)
        and expr.symbol is not None
        and expr.symbol.kind == "param"
        and not isinstance(expr.symbol.ctype, StructType)
    )


class TypeChecker:
    def __init__(self, program: A.Program):
        self.program = program
        self.path = program.path
        self.structs: Dict[str, A.StructDecl] = {}
        self.signatures: Dict[str, A.FunctionDecl] = {}
        self.globals = _Scope()
        self._uid = 0
        self._function: Optional[A.FunctionDecl] = None

    # -- helpers -----------------------------------------------------------

    def _error(self, node: Optional[A.Node], message: str) -> MiniCTypeError:
        pos = node.pos if node is not None else None
        return MiniCTypeError(
            message,
            line=pos.line if pos else None,
            column=pos.column if pos else None,
            path=self.path,
        )

    def _new_symbol(self, kind: str, name: str, ctype: CType, pos, function: str = "") -> A.Symbol:
        symbol = A.Symbol(kind, name, ctype, self._uid, function, pos)
        self._uid += 1
        return symbol

    def _declare(self, scope: _Scope, symbol: A.Symbol, node: A.Node) -> None:
        if symbol.name in scope.names:
            raise self._error(node, f"'{symbol.name}' is already declared in this scope")
        if symbol.name in BUILTINS:
            raise self._error(node, f"'{symbol.name}' is a reserved name")
        scope.names[symbol.name] = symbol

    def _check_type(self, ctype: CType, node: A.Node, allow_void: bool = False) -> None:
        if isinstance(ctype, VoidType):
            if not allow_void:
                raise self._error(node, "void is not a value type")
            return
        if isinstance(ctype, StructType):
            if ctype.name not in self.structs:
                raise self._error(node, f"unknown struct '{ctype.name}'")
            return
        if isinstance(ctype, PointerType):
            if isinstance(ctype.target, VoidType):
                raise self._error(node, "void pointers are not supported")
            self._check_type(ctype.target, node)
            return
        if isinstance(ctype, ArrayType):
            if ctype.length <= 0:
                raise self._error(node, "array length must be positive")
            self._check_type(ctype.element, node)

    # -- program -----------------------------------------------------------

    def check(self) -> TypedProgram:
        for decl in self.program.structs:
            if decl.name in self.structs:
                raise self._error(decl, f"struct '{decl.name}' is already declared")
            self.structs[decl.name] = decl
        for decl in self.program.structs:
            names = set()
            for f in decl.fields:
                if f.name in names:
                    raise self._error(f, f"duplicate field '{f.name}' in struct {decl.name}")
                names.add(f.name)
                self._check_type(f.ctype, f)
        layouts = LayoutCalculator(self.structs)
        for name in self.structs:
            layouts.layout(StructType(name))

        for func in self.program.functions:
            if func.name in self.signatures:
                raise self._error(func, f"function '{func.name}' is already defined")
            if func.name in BUILTINS:
                raise self._error(func, f"'{func.name}' is a reserved name")
            self._check_signature(func)
            self.signatures[func.name] = func
        if "main" not in self.signatures:
            raise MiniCTypeError("program has no main function", path=self.path)
        main = self.signatures["main"]
        if main.params:
            raise self._error(main, "main takes no parameters")

        decls: List[A.TopLevel] = []
        typed_globals: List[A.VarDecl] = []
        typed_functions: Dict[str, A.FunctionDecl] = {}
        for decl in self.program.decls:
            if isinstance(decl, A.StructDecl):
                decls.append(decl)
            elif isinstance(decl, A.VarDecl):
                if decl.name in self.signatures:
                    raise self._error(decl, f"'{decl.name}' is already a function")
                typed = self._var_decl(decl, self.globals, "global")
                typed_globals.append(typed)
                decls.append(typed)
            else:
                typed = self._function_decl(decl)
                typed_functions[typed.name] = typed
                decls.append(typed)

        program = replace(self.program, decls=tuple(decls))
        logger.debug(
            f"Typechecked {self.path}: {len(typed_functions)} functions, "
            f"{len(typed_globals)} globals, {len(self.structs)} structs"
        )
        return TypedProgram(
            program=program,
            structs=dict(self.structs),
            functions=typed_functions,
            globals=tuple(typed_globals),
            path=self.path,
            layouts=layouts,
        )

    def _check_signature(self, func: A.FunctionDecl) -> None:
        ret = func.return_type
        if not isinstance(ret, VoidType) and not ret.is_scalar():
            raise self._error(func, "functions may only return int, char, pointers or void")
        self._check_type(ret, func, allow_void=True)
        seen = set()
        for p in func.params:
            if p.name in seen:
                raise self._error(p, f"duplicate parameter '{p.name}'")
            seen.add(p.name)
            if isinstance(p.ctype, ArrayType):
                raise self._error(p, "array parameters are not supported")
            self._check_type(p.ctype, p)

    def _function_decl(self, func: A.FunctionDecl) -> A.FunctionDecl:
        self._function = func
        scope = _Scope(self.globals)
        params = []
        for p in func.params:
            symbol = self._new_symbol("param", p.name, p.ctype, p.pos, func.name)
            self._declare(scope, symbol, p)
            params.append(replace(p, symbol=symbol))
        # parameters and the outermost block share one scope, as in C
        items = tuple(self._block_item(item, scope) for item in func.body.items)
        body = replace(func.body, items=items)
        self._function = None
        return replace(func, params=tuple(params), body=body)

    def _var_decl(self, decl: A.VarDecl, scope: _Scope, kind: str) -> A.VarDecl:
        self._check_type(decl.ctype, decl)
        init = None
        if decl.init is not None:
            if not decl.ctype.is_scalar():
                raise self._error(decl, "aggregate initializers are not supported")
            if kind == "global" and _contains_call(decl.init):
                raise self._error(decl.init, "global initializers may not call functions")
            init = self._value(decl.init, scope)
            self._require_assignable(decl.ctype, init, decl.init)
        function = self._function.name if self._function is not None else ""
        symbol = self._new_symbol(kind, decl.name, decl.ctype, decl.pos, function)
        self._declare(scope, symbol, decl)
        return replace(decl, init=init, symbol=symbol)

    # -- statements --------------------------------------------------------

    def _block_item(self, item, scope: _Scope):
        if isinstance(item, A.VarDecl):
            return self._var_decl(item, scope, "local")
        return self._stmt(item, scope)

    def _stmt(self, stmt: A.Stmt, scope: _Scope) -> A.Stmt:
        if isinstance(stmt, A.Block):
            inner = _Scope(scope)
            return replace(stmt, items=tuple(self._block_item(i, inner) for i in stmt.items))
        if isinstance(stmt, A.Assign):
            target = self._expr(stmt.target, scope)
            if not _is_lvalue(target):
                raise self._error(stmt.target, "assignment target is not an lvalue")
            if _is_scalar_param(target):
                raise self._error(stmt.target, f"parameter '{target.name}' is read-only")
            if not target.ctype.is_scalar():
                raise self._error(stmt.target, f"cannot assign a whole {target.ctype}")
            value = self._value(stmt.value, scope)
            self._require_assignable(target.ctype, value, stmt.value)
            return replace(stmt, target=target, value=value)
        if isinstance(stmt, A.If):
            cond = self._condition(stmt.cond, scope)
            then = self._stmt(stmt.then, scope)
            otherwise = self._stmt(stmt.otherwise, scope) if stmt.otherwise is not None else None
            return replace(stmt, cond=cond, then=then, otherwise=otherwise)
        if isinstance(stmt, A.While):
            return replace(stmt, cond=self._condition(stmt.cond, scope), body=self._stmt(stmt.body, scope))
        if isinstance(stmt, A.Return):
            return self._return(stmt, scope)
        if isinstance(stmt, A.Free):
            pointer = self._value(stmt.pointer, scope)
            if not pointer.ctype.is_pointer():
                raise self._error(stmt.pointer, f"free expects a pointer, got {pointer.ctype}")
            return replace(stmt, pointer=pointer)
        if isinstance(stmt, A.Print):
            value = self._value(stmt.value, scope)
            if not value.ctype.is_integral():
                raise self._error(stmt.value, f"print expects int or char, got {value.ctype}")
            return replace(stmt, value=value)
        if isinstance(stmt, A.ExprStmt):
            return replace(stmt, expr=self._call(stmt.expr, scope, want_value=False))
        raise self._error(stmt, f"unsupported statement {type(stmt).__name__}")

    def _condition(self, expr: A.Expr, scope: _Scope) -> A.Expr:
        return self._value(expr, scope)

    def _return(self, stmt: A.Return, scope: _Scope) -> A.Return:
        ret = self._function.return_type
        if stmt.value is None:
            if not isinstance(ret, VoidType):
                raise self._error(stmt, f"function '{self._function.name}' must return {ret}")
            return stmt
        if isinstance(ret, VoidType):
            raise self._error(stmt, f"void function '{self._function.name}' returns a value")
        value = self._value(stmt.value, scope)
        self._require_assignable(ret, value, stmt.value)
        return replace(stmt, value=value)

    # -- expressions -------------------------------------------------------

    def _require_assignable(self, dst: CType, value: A.Expr, node: A.Node) -> None:
        src = value.ctype
        if dst.is_integral() and src.is_integral():
            return
        if dst.is_pointer() and (src == dst or _null_literal(value)):
            return
        raise self._error(node, f"incompatible types: cannot assign {src} to {dst}")

    def _value(self, expr: A.Expr, scope: _Scope = None) -> A.Expr:
        typed = self._expr(expr, scope or self.globals)
        if not typed.ctype.is_scalar():
            raise self._error(expr, f"a value of type {typed.ctype} cannot be used here")
        return typed

    def _expr(self, expr: A.Expr, scope: _Scope) -> A.Expr:
        if isinstance(expr, A.IntLit):
            return replace(expr, ctype=INT)
        if isinstance(expr, A.CharLit):
            return replace(expr, ctype=CHAR)
        if isinstance(expr, A.VarRef):
            symbol = scope.lookup(expr.name)
            if symbol is None:
                raise self._error(expr, f"undeclared identifier '{expr.name}'")
            return replace(expr, ctype=symbol.ctype, symbol=symbol)
        if isinstance(expr, A.FieldAccess):
            return self._field_access(expr, scope)
        if isinstance(expr, A.Index):
            base = self._expr(expr.base, scope)
            if isinstance(base.ctype, ArrayType):
                elem = base.ctype.element
            elif isinstance(base.ctype, PointerType):
                elem = base.ctype.target
            else:
                raise self._error(expr, f"cannot index a value of type {base.ctype}")
            index = self._value(expr.index, scope)
            if not index.ctype.is_integral():
                raise self._error(expr.index, "array index must be an integer")
            return replace(expr, base=base, index=index, ctype=elem)
        if isinstance(expr, A.AddrOf):
            operand = self._expr(expr.operand, scope)
            if not _is_lvalue(operand):
                raise self._error(expr, "address-of requires an lvalue")
            if _is_scalar_param(operand):
                raise self._error(expr, f"cannot take the address of parameter '{operand.name}'")
            if isinstance(operand.ctype, ArrayType):
                raise self._error(expr, "cannot take the address of a whole array; use &a[0]")
            return replace(expr, operand=operand, ctype=PointerType(operand.ctype))
        if isinstance(expr, A.Deref):
            operand = self._value(expr.operand, scope)
            if not operand.ctype.is_pointer():
                raise self._error(expr, f"cannot dereference a value of type {operand.ctype}")
            return replace(expr, operand=operand, ctype=operand.ctype.target)
        if isinstance(expr, A.Unary):
            operand = self._value(expr.operand, scope)
            if not operand.ctype.is_integral():
                raise self._error(expr, f"unary '{expr.op}' needs an integer operand")
            return replace(expr, operand=operand, ctype=INT)
        if isinstance(expr, A.Binary):
            return self._binary(expr, scope)
        if isinstance(expr, A.Call):
            return self._call(expr, scope, want_value=True)
        if isinstance(expr, A.Malloc):
            self._check_type(expr.element_type, expr)
            count = None
            if expr.count is not None:
                count = self._value(expr.count, scope)
                if not count.ctype.is_integral():
                    raise self._error(expr.count, "malloc element count must be an integer")
            return replace(expr, count=count, ctype=PointerType(expr.element_type))
        raise self._error(expr, f"unsupported expression {type(expr).__name__}")

    def _field_access(self, expr: A.FieldAccess, scope: _Scope) -> A.FieldAccess:
        base = self._expr(expr.base, scope)
        if expr.arrow:
            if not (isinstance(base.ctype, PointerType) and isinstance(base.ctype.target, StructType)):
                raise self._error(expr, f"'->' applied to non-struct-pointer {base.ctype}")
            struct_type = base.ctype.target
        else:
            if not isinstance(base.ctype, StructType):
                raise self._error(expr, f"'.' applied to non-struct {base.ctype}")
            struct_type = base.ctype
        decl = self.structs[struct_type.name].lookup_field(expr.field_name)
        if decl is None:
            raise self._error(expr, f"struct {struct_type.name} has no field '{expr.field_name}'")
        return replace(expr, base=base, ctype=decl.ctype)

    def _binary(self, expr: A.Binary, scope: _Scope) -> A.Binary:
        left = self._value(expr.left, scope)
        right = self._value(expr.right, scope)
        lt, rt = left.ctype, right.ctype
        if expr.op in ARITHMETIC_OPS:
            if lt.is_integral() and rt.is_integral():
                return replace(expr, left=left, right=right, ctype=INT)
            raise self._error(expr, "pointer arithmetic is limited to indexing and field access")
        if lt.is_integral() and rt.is_integral():
            return replace(expr, left=left, right=right, ctype=INT)
        if lt.is_pointer() and (rt == lt or _null_literal(right)):
            return replace(expr, left=left, right=right, ctype=INT)
        if rt.is_pointer() and _null_literal(left):
            return replace(expr, left=left, right=right, ctype=INT)
        raise self._error(expr, f"cannot compare {lt} with {rt}")

    def _call(self, expr: A.Call, scope: _Scope, want_value: bool) -> A.Call:
        func = self.signatures.get(expr.name)
        if func is None:
            raise self._error(expr, f"call to undefined function '{expr.name}'")
        if len(expr.args) != len(func.params):
            raise self._error(
                expr,
                f"'{expr.name}' expects {len(func.params)} arguments, got {len(expr.args)}",
            )
        args = []
        for arg, param in zip(expr.args, func.params):
            if isinstance(param.ctype, StructType):
                typed = self._expr(arg, scope)
                if typed.ctype != param.ctype or not _is_lvalue(typed):
                    raise self._error(arg, f"argument for '{param.name}' must be a {param.ctype} object")
            else:
                typed = self._value(arg, scope)
                self._require_assignable(param.ctype, typed, arg)
            args.append(typed)
        if want_value and isinstance(func.return_type, VoidType):
            raise self._error(expr, f"void function '{expr.name}' used as a value")
        return replace(expr, args=tuple(args), ctype=func.return_type)


def _contains_call(expr: A.Expr) -> bool:
    if isinstance(expr, (A.Call, A.Malloc)):
        return True
    for child in ("base", "index", "operand", "left", "right"):
        sub = getattr(expr, child, None)
        if isinstance(sub, A.Expr) and _contains_call(sub):
            return True
    return False


def typecheck(ast: A.Program) -> TypedProgram:
    """
    对解析后的程序做类型检查

    Args:
        ast: parse 的结果

    Returns:
        TypedProgram: 带类型标注的程序及其布局

    Raises:
        MiniCTypeError: 带出错节点的位置
        LayoutError: 结构体按值包含自身
    """
    return TypeChecker(ast).check()
