"""
MiniC 解析器

MiniC 是 C 的子集, C 语法由 ``pycparser`` 解析。先把 ``//`` 注释替换为空白 (行列号不变),
再把得到的 C AST 逐节点转换为 MiniC ``Ast``。MiniC 之外的 C 构造在其位置报 ``ParseError``。
"""

import re
from typing import List, Optional, Tuple

from pycparser import c_ast, c_parser

from config.logging_config import setup_logger
from fsdfi_errors import ParseError
from minic import ast_nodes as A
from minic.types import CHAR, INT, VOID, ArrayType, CType, PointerType, StructType

logger = setup_logger()

_LINE_COMMENT = re.compile(r"//[^\n]*")
_ERROR_POSITION = re.compile(r":(\d+)(?::(\d+))?:\s*(.*)$", re.S)

BINARY_OPS = {"+", "-", "*", "/", "<", "<=", ">", ">=", "==", "!="}
BUILTINS = {"print", "free", "malloc", "sizeof"}

_CHAR_ESCAPES = {
    "n": 10,
    "t": 9,
    "r": 13,
    "0": 0,
    "\\": 92,
    "'": 39,
    '"': 34,
}


def _blank_comments(text: str) -> str:
    return _LINE_COMMENT.sub(lambda m: " " * len(m.group(0)), text)


def parse(source: A.SourceProgram) -> A.Program:
    """
    解析 MiniC 源码

    Args:
        source (SourceProgram): 源码及其路径

    Returns:
        Program: 每个节点都带位置信息的 Ast

    Raises:
        ParseError: 第一个语法错误或不支持的构造
    """
    text = _blank_comments(source.text)
    parser = c_parser.CParser()
    try:
        file_ast = parser.parse(text, filename=source.path)
    except c_parser.ParseError as e:
        raise _translate_error(str(e), source.path, _last_token_position(parser)) from None
    program = _Converter(source.path).convert(file_ast)
    logger.debug(f"Parsed {source.path}: {len(program.decls)} top-level declarations")
    return program


def parse_text(text: str, path: str = "<input>") -> A.Program:
    return parse(A.SourceProgram(text=text, path=path))


def _last_token_position(parser) -> Optional[Tuple[int, Optional[int]]]:
    """解析器最后读入的记号的 (行, 列), 取不到时返回 None"""
    lexer = getattr(parser, "clex", None)
    token = getattr(lexer, "last_token", None)
    line = getattr(token, "lineno", None)
    if line is None:
        return None
    find_column = getattr(lexer, "find_tok_column", None)
    return line, find_column(token) if find_column else None


def _translate_error(
    message: str, path: str, fallback: Optional[Tuple[int, Optional[int]]] = None
) -> ParseError:
    body = message[len(path):] if path and message.startswith(path) else message
    match = _ERROR_POSITION.search(body)
    if not match:
        # message without a path:line:col prefix
        line, column = fallback if fallback else (None, None)
        return ParseError(body.lstrip(": ").strip() or message, line=line, column=column, path=path)
    line, column, detail = match.groups()
    return ParseError(
        detail.strip(),
        line=int(line),
        column=int(column) if column else None,
        path=path,
    )


class _Converter:
    """pycparser AST -> MiniC Ast"""

    def __init__(self, path: str):
        self.path = path

    # -- helpers -----------------------------------------------------------

    def _pos(self, node) -> Optional[A.Pos]:
        coord = getattr(node, "coord", None)
        if coord is None or coord.line is None:
            return None
        return A.Pos(coord.line, coord.column or 0)

    def _error(self, node, message: str) -> ParseError:
        pos = self._pos(node)
        return ParseError(
            message,
            line=pos.line if pos else None,
            column=pos.column if pos else None,
            path=self.path,
        )

    def _check_plain_decl(self, decl: c_ast.Decl) -> None:
        if decl.quals or decl.storage or decl.funcspec:
            raise self._error(decl, "qualifiers and storage classes are not supported")
        if getattr(decl, "bitsize", None) is not None:
            raise self._error(decl, "bit-fields are not supported")

    # -- top level ---------------------------------------------------------

    def convert(self, file_ast: c_ast.FileAST) -> A.Program:
        decls: List[A.TopLevel] = []
        for ext in file_ast.ext:
            if isinstance(ext, c_ast.FuncDef):
                decls.append(self._function(ext))
            elif isinstance(ext, c_ast.Decl):
                decls.append(self._top_decl(ext))
            else:
                raise self._error(ext, f"unsupported top-level construct {type(ext).__name__}")
        return A.Program(tuple(decls), path=self.path, pos=A.Pos(1, 1))

    def _top_decl(self, decl: c_ast.Decl):
        self._check_plain_decl(decl)
        if isinstance(decl.type, c_ast.Struct) and decl.name is None:
            return self._struct(decl.type)
        if isinstance(decl.type, c_ast.FuncDecl):
            raise self._error(decl, "function prototypes are not supported")
        return self._var_decl(decl)

    def _struct(self, node: c_ast.Struct) -> A.StructDecl:
        if node.name is None:
            raise self._error(node, "anonymous structs are not supported")
        if node.decls is None:
            raise self._error(node, f"struct {node.name} declared without a body")
        fields = []
        for member in node.decls:
            if not isinstance(member, c_ast.Decl) or member.name is None:
                raise self._error(member, "unsupported struct member")
            self._check_plain_decl(member)
            ctype = self._type(member.type)
            fields.append(A.FieldDecl(ctype, member.name, pos=self._pos(member)))
        return A.StructDecl(node.name, tuple(fields), pos=self._pos(node))

    def _var_decl(self, decl: c_ast.Decl) -> A.VarDecl:
        if decl.name is None:
            raise self._error(decl, "declaration without a name")
        ctype = self._type(decl.type)
        init = None
        if decl.init is not None:
            if isinstance(decl.init, c_ast.InitList):
                raise self._error(decl.init, "initializer lists are not supported")
            init = self._expr(decl.init, allow_malloc=True)
        return A.VarDecl(ctype, decl.name, init, pos=self._pos(decl))

    def _function(self, node: c_ast.FuncDef) -> A.FunctionDecl:
        decl = node.decl
        self._check_plain_decl(decl)
        if node.param_decls:
            raise self._error(node, "K&R parameter declarations are not supported")
        func_type = decl.type
        return_type = self._type(func_type.type)
        params = self._params(func_type.args)
        body = self._block(node.body)
        return A.FunctionDecl(return_type, decl.name, params, body, pos=self._pos(decl))

    def _params(self, param_list) -> Tuple[A.Param, ...]:
        if param_list is None:
            return ()
        params = list(param_list.params)
        if (
            len(params) == 1
            and isinstance(params[0], c_ast.Typename)
            and self._type(params[0].type) == VOID
        ):
            return ()
        result = []
        for p in params:
            if isinstance(p, c_ast.EllipsisParam):
                raise self._error(p, "variadic functions are not supported")
            if not isinstance(p, c_ast.Decl) or p.name is None:
                raise self._error(p, "parameters must be named")
            self._check_plain_decl(p)
            result.append(A.Param(self._type(p.type), p.name, pos=self._pos(p)))
        return tuple(result)

    # -- types -------------------------------------------------------------

    def _type(self, node) -> CType:
        if isinstance(node, c_ast.TypeDecl):
            if node.quals:
                raise self._error(node, "type qualifiers are not supported")
            return self._base_type(node.type)
        if isinstance(node, c_ast.PtrDecl):
            if node.quals:
                raise self._error(node, "type qualifiers are not supported")
            target = self._type(node.type)
            if isinstance(target, ArrayType):
                raise self._error(node, "pointers to arrays are not supported")
            return PointerType(target)
        if isinstance(node, c_ast.ArrayDecl):
            dim = node.dim
            if not isinstance(dim, c_ast.Constant) or dim.type != "int":
                raise self._error(node, "array length must be an integer constant")
            return ArrayType(self._type(node.type), _int_value(dim.value))
        if isinstance(node, c_ast.Typename):
            return self._type(node.type)
        if isinstance(node, c_ast.FuncDecl):
            raise self._error(node, "function pointers are not supported")
        raise self._error(node, f"unsupported type construct {type(node).__name__}")

    def _base_type(self, node) -> CType:
        if isinstance(node, c_ast.IdentifierType):
            names = node.names
            if names == ["int"]:
                return INT
            if names == ["char"]:
                return CHAR
            if names == ["void"]:
                return VOID
            raise self._error(node, f"unsupported type '{' '.join(names)}'")
        if isinstance(node, c_ast.Struct):
            if node.decls is not None:
                raise self._error(node, "struct definitions must stand alone")
            return StructType(node.name)
        if isinstance(node, c_ast.Union):
            raise self._error(node, "unions are not supported")
        if isinstance(node, c_ast.Enum):
            raise self._error(node, "enums are not supported")
        raise self._error(node, f"unsupported type construct {type(node).__name__}")

    # -- statements --------------------------------------------------------

    def _block(self, node: c_ast.Compound) -> A.Block:
        items = []
        for item in node.block_items or []:
            converted = self._block_item(item)
            if converted is not None:
                items.append(converted)
        return A.Block(tuple(items), pos=self._pos(node))

    def _block_item(self, node):
        if isinstance(node, c_ast.Decl):
            self._check_plain_decl(node)
            if isinstance(node.type, c_ast.Struct):
                raise self._error(node, "struct definitions must be at top level")
            return self._var_decl(node)
        return self._stmt(node)

    def _stmt(self, node) -> Optional[A.Stmt]:
        pos = self._pos(node)
        if isinstance(node, c_ast.Compound):
            return self._block(node)
        if isinstance(node, c_ast.EmptyStatement):
            return None
        if isinstance(node, c_ast.Assignment):
            if node.op != "=":
                raise self._error(node, f"compound assignment '{node.op}' is not supported")
            target = self._expr(node.lvalue)
            value = self._expr(node.rvalue, allow_malloc=True)
            return A.Assign(target, value, pos=pos)
        if isinstance(node, c_ast.If):
            then = self._stmt(node.iftrue) or A.Block((), pos=pos)
            otherwise = self._stmt(node.iffalse) if node.iffalse is not None else None
            return A.If(self._expr(node.cond), then, otherwise, pos=pos)
        if isinstance(node, c_ast.While):
            body = self._stmt(node.stmt) or A.Block((), pos=pos)
            return A.While(self._expr(node.cond), body, pos=pos)
        if isinstance(node, c_ast.Return):
            value = self._expr(node.expr) if node.expr is not None else None
            return A.Return(value, pos=pos)
        if isinstance(node, c_ast.FuncCall):
            name = self._callee(node)
            args = self._args(node)
            if name == "print":
                if len(args) != 1:
                    raise self._error(node, "print takes exactly one argument")
                return A.Print(self._expr(args[0]), pos=pos)
            if name == "free":
                if len(args) != 1:
                    raise self._error(node, "free takes exactly one argument")
                return A.Free(self._expr(args[0]), pos=pos)
            if name in BUILTINS:
                raise self._error(node, f"{name}(...) cannot be used as a statement")
            return A.ExprStmt(self._call(node), pos=pos)
        raise self._error(node, f"unsupported statement {type(node).__name__}")

    # -- expressions -------------------------------------------------------

    def _callee(self, node: c_ast.FuncCall) -> str:
        if not isinstance(node.name, c_ast.ID):
            raise self._error(node, "calls must name a function directly")
        return node.name.name

    def _args(self, node: c_ast.FuncCall) -> list:
        return list(node.args.exprs) if node.args is not None else []

    def _call(self, node: c_ast.FuncCall) -> A.Call:
        name = self._callee(node)
        args = tuple(self._expr(a) for a in self._args(node))
        return A.Call(name, args, pos=self._pos(node))

    def _expr(self, node, allow_malloc: bool = False) -> A.Expr:
        pos = self._pos(node)
        if isinstance(node, c_ast.Constant):
            if node.type == "int":
                return A.IntLit(_int_value(node.value), pos=pos)
            if node.type == "char":
                return A.CharLit(_char_value(node.value, lambda m: self._error(node, m)), pos=pos)
            raise self._error(node, f"{node.type} literals are not supported")
        if isinstance(node, c_ast.ID):
            if node.name in BUILTINS:
                raise self._error(node, f"'{node.name}' is reserved")
            return A.VarRef(node.name, pos=pos)
        if isinstance(node, c_ast.StructRef):
            if not isinstance(node.field, c_ast.ID):
                raise self._error(node, "malformed field access")
            return A.FieldAccess(self._expr(node.name), node.field.name, node.type == "->", pos=pos)
        if isinstance(node, c_ast.ArrayRef):
            return A.Index(self._expr(node.name), self._expr(node.subscript), pos=pos)
        if isinstance(node, c_ast.UnaryOp):
            return self._unary(node, pos)
        if isinstance(node, c_ast.BinaryOp):
            if node.op not in BINARY_OPS:
                raise self._error(node, f"operator '{node.op}' is not supported")
            return A.Binary(node.op, self._expr(node.left), self._expr(node.right), pos=pos)
        if isinstance(node, c_ast.FuncCall):
            name = self._callee(node)
            if name == "malloc":
                if not allow_malloc:
                    raise self._error(node, "malloc may only appear as an assignment or initializer value")
                return self._malloc(node, pos)
            if name in BUILTINS:
                raise self._error(node, f"{name}(...) is a statement, not an expression")
            return self._call(node)
        raise self._error(node, f"unsupported expression {type(node).__name__}")

    def _unary(self, node: c_ast.UnaryOp, pos) -> A.Expr:
        if node.op == "&":
            return A.AddrOf(self._expr(node.expr), pos=pos)
        if node.op == "*":
            return A.Deref(self._expr(node.expr), pos=pos)
        if node.op == "-":
            return A.Unary("-", self._expr(node.expr), pos=pos)
        if node.op == "sizeof":
            raise self._error(node, "sizeof is only supported inside malloc(...)")
        raise self._error(node, f"operator '{node.op}' is not supported")

    def _malloc(self, node: c_ast.FuncCall, pos) -> A.Malloc:
        args = self._args(node)
        if len(args) != 1:
            raise self._error(node, "malloc takes exactly one argument")
        arg = args[0]
        if self._is_sizeof(arg):
            return A.Malloc(self._type(arg.expr), None, pos=pos)
        if isinstance(arg, c_ast.BinaryOp) and arg.op == "*" and self._is_sizeof(arg.left):
            return A.Malloc(self._type(arg.left.expr), self._expr(arg.right), pos=pos)
        raise self._error(node, "malloc argument must be sizeof(T) or sizeof(T)*N")

    @staticmethod
    def _is_sizeof(node) -> bool:
        return (
            isinstance(node, c_ast.UnaryOp)
            and node.op == "sizeof"
            and isinstance(node.expr, c_ast.Typename)
        )


def _int_value(text: str) -> int:
    text = text.rstrip("uUlL")
    if text.lower().startswith("0x"):
        return int(text, 16)
    if len(text) > 1 and text.startswith("0"):
        return int(text, 8)
    return int(text)


def _char_value(text: str, error) -> int:
    body = text[1:-1]
    if len(body) == 1 and body != "\\":
        return ord(body)
    if len(body) == 2 and body[0] == "\\" and body[1] in _CHAR_ESCAPES:
        return _CHAR_ESCAPES[body[1]]
    raise error(f"unsupported character literal {text}")
