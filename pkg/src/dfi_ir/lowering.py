"""
TypedProgram -> IRProgram

编号全局唯一并遵循降级顺序: 先是 ``__globals__`` 初始化函数, 再按源码顺序处理各函数。
函数内的局部变量在入口处按声明顺序分配, 然后逐条语句降级函数体。
赋值语句先求值右侧, 再计算目标地址。
"""

from typing import Dict, List, Optional

from config.logging_config import setup_logger
from dfi_ir import instructions as ir
from dfi_ir.instructions import AllocKind, IRFunction, IRProgram, Reg
from fsdfi_errors import LoweringError
from minic import ast_nodes as A
from minic.printer import format_expr
from minic.typechecker import TypedProgram
from minic.types import INT, VOID, CType, PointerType, StructType

logger = setup_logger()


def describe_target(expr: A.Expr) -> str:
    """左值的源码级描述, 下标折叠为 ``*``: ``s.a[*]``"""
    if isinstance(expr, A.VarRef):
        return expr.name
    if isinstance(expr, A.FieldAccess):
        sep = "->" if expr.arrow else "."
        return f"{describe_target(expr.base)}{sep}{expr.field_name}"
    if isinstance(expr, A.Index):
        return f"{describe_target(expr.base)}[*]"
    if isinstance(expr, A.Deref):
        return f"*{describe_target(expr.operand)}"
    return format_expr(expr)


class _Counters:
    def __init__(self):
        self.next_def = 1
        self.next_use = 0
        self.next_alloc = 0

    def new_def(self) -> int:
        self.next_def += 1
        return self.next_def - 1

    def new_use(self) -> int:
        self.next_use += 1
        return self.next_use - 1

    def new_alloc(self) -> int:
        self.next_alloc += 1
        return self.next_alloc - 1


class _FunctionLowerer:
    def __init__(self, lowerer: "Lowerer", name: str):
        self.lowerer = lowerer
        self.name = name
        self.code: List[ir.Instr] = []
        self.reg_types: Dict[Reg, CType] = {}
        self._next_reg = 0
        self._next_label = 0
        self.locals: Dict[int, int] = {}  # symbol uid -> alloc id
        self.params: Dict[int, Reg] = {}  # symbol uid -> register

    # -- helpers -----------------------------------------------------------

    def reg(self, ctype: CType) -> Reg:
        name = f"%{self._next_reg}"
        self._next_reg += 1
        self.reg_types[name] = ctype
        return name

    def label(self) -> str:
        name = f"L{self._next_label}"
        self._next_label += 1
        return name

    def emit(self, ins: ir.Instr) -> ir.Instr:
        self.code.append(ins)
        return ins

    def _error(self, node: A.Node, message: str) -> LoweringError:
        pos = node.pos
        return LoweringError(
            message,
            line=pos.line if pos else None,
            column=pos.column if pos else None,
            path=self.lowerer.path,
        )

    # -- allocation --------------------------------------------------------

    def alloc_decl(self, decl: A.VarDecl, kind: AllocKind) -> int:
        alloc = self.lowerer.counters.new_alloc()
        self.emit(ir.Alloc(None, alloc, kind, decl.ctype, decl.name, pos=decl.pos))
        return alloc

    # -- addresses ---------------------------------------------------------

    def address(self, expr: A.Expr) -> Reg:
        pos = expr.pos
        if isinstance(expr, A.VarRef):
            symbol = expr.symbol
            if symbol.uid in self.params:
                # struct parameters arrive as the caller's object address
                return self.params[symbol.uid]
            alloc = self.locals.get(symbol.uid)
            if alloc is None:
                alloc = self.lowerer.global_allocs.get(symbol.uid)
            if alloc is None:
                raise self._error(expr, f"no storage for '{expr.name}'")
            dest = self.reg(PointerType(symbol.ctype))
            self.emit(ir.AddrOf(dest, alloc, pos=pos))
            return dest
        if isinstance(expr, A.FieldAccess):
            if expr.arrow:
                base = self.value(expr.base)
                struct_name = expr.base.ctype.target.name
            else:
                base = self.address(expr.base)
                struct_name = expr.base.ctype.name
            info = self.lowerer.layouts.field_info(struct_name, expr.field_name)
            dest = self.reg(PointerType(expr.ctype))
            self.emit(ir.FieldAddr(dest, base, info.offset, info.slot_start, expr.field_name, pos=pos))
            return dest
        if isinstance(expr, A.Index):
            if isinstance(expr.base.ctype, PointerType):
                base = self.value(expr.base)
            else:
                base = self.address(expr.base)
            index = self.value(expr.index)
            dest = self.reg(PointerType(expr.ctype))
            size = self.lowerer.layouts.size_of(expr.ctype)
            self.emit(ir.IndexAddr(dest, base, index, size, pos=pos))
            return dest
        if isinstance(expr, A.Deref):
            return self.value(expr.operand)
        raise self._error(expr, f"{type(expr).__name__} is not addressable")

    # -- values ------------------------------------------------------------

    def value(self, expr: A.Expr) -> Reg:
        pos = expr.pos
        if isinstance(expr, (A.IntLit, A.CharLit)):
            dest = self.reg(expr.ctype)
            self.emit(ir.Const(dest, expr.value, pos=pos))
            return dest
        if isinstance(expr, A.VarRef) and expr.symbol.uid in self.params:
            return self.params[expr.symbol.uid]
        if isinstance(expr, (A.VarRef, A.FieldAccess, A.Index, A.Deref)):
            addr = self.address(expr)
            dest = self.reg(expr.ctype)
            use = self.lowerer.counters.new_use()
            self.emit(ir.Load(dest, addr, expr.ctype, use, describe_target(expr), pos=pos))
            return dest
        if isinstance(expr, A.AddrOf):
            return self.address(expr.operand)
        if isinstance(expr, A.Unary):
            operand = self.value(expr.operand)
            dest = self.reg(INT)
            self.emit(ir.Neg(dest, operand, pos=pos))
            return dest
        if isinstance(expr, A.Binary):
            left = self.value(expr.left)
            right = self.value(expr.right)
            dest = self.reg(INT)
            self.emit(ir.BinOp(dest, expr.op, left, right, pos=pos))
            return dest
        if isinstance(expr, A.Call):
            return self.call(expr)
        if isinstance(expr, A.Malloc):
            count = self.value(expr.count) if expr.count is not None else None
            dest = self.reg(expr.ctype)
            alloc = self.lowerer.counters.new_alloc()
            name = f"malloc@L{pos.line}" if pos else "malloc"
            self.emit(ir.Alloc(dest, alloc, AllocKind.HEAP, expr.element_type, name, count, pos=pos))
            return dest
        raise self._error(expr, f"cannot lower {type(expr).__name__}")

    def call(self, expr: A.Call) -> Optional[Reg]:
        func = self.lowerer.program.function(expr.name)
        args = []
        for arg, param in zip(expr.args, func.params):
            if isinstance(param.ctype, StructType):
                args.append(self.address(arg))
            else:
                args.append(self.value(arg))
        dest = None if func.return_type == VOID else self.reg(func.return_type)
        self.emit(ir.Call(dest, expr.name, tuple(args), pos=expr.pos))
        return dest

    # -- statements --------------------------------------------------------

    def store(self, target: A.Expr, value: Reg, pos) -> None:
        addr = self.address(target)
        def_id = self.lowerer.counters.new_def()
        self.emit(ir.Store(addr, value, target.ctype, def_id, describe_target(target), pos=pos))

    def stmt(self, node) -> None:
        pos = node.pos
        if isinstance(node, A.VarDecl):
            if node.init is not None:
                value = self.value(node.init)
                ref = A.VarRef(node.name, symbol=node.symbol, ctype=node.ctype, pos=node.pos)
                self.store(ref, value, pos)
        elif isinstance(node, A.Block):
            for item in node.items:
                self.stmt(item)
        elif isinstance(node, A.Assign):
            value = self.value(node.value)
            self.store(node.target, value, pos)
        elif isinstance(node, A.If):
            cond = self.value(node.cond)
            then_label, else_label, end_label = self.label(), self.label(), self.label()
            self.emit(ir.Branch(cond, then_label, else_label, pos=pos))
            self.emit(ir.Label(then_label))
            self.stmt(node.then)
            self.emit(ir.Jump(end_label))
            self.emit(ir.Label(else_label))
            if node.otherwise is not None:
                self.stmt(node.otherwise)
            self.emit(ir.Label(end_label))
        elif isinstance(node, A.While):
            head, body, end = self.label(), self.label(), self.label()
            self.emit(ir.Label(head))
            cond = self.value(node.cond)
            self.emit(ir.Branch(cond, body, end, pos=pos))
            self.emit(ir.Label(body))
            self.stmt(node.body)
            self.emit(ir.Jump(head))
            self.emit(ir.Label(end))
        elif isinstance(node, A.Return):
            value = self.value(node.value) if node.value is not None else None
            self.emit(ir.Ret(value, pos=pos))
        elif isinstance(node, A.Free):
            self.emit(ir.Free(self.value(node.pointer), pos=pos))
        elif isinstance(node, A.Print):
            self.emit(ir.Print(self.value(node.value), pos=pos))
        elif isinstance(node, A.ExprStmt):
            self.call(node.expr)
        else:
            raise self._error(node, f"cannot lower {type(node).__name__}")

    def finish(self, return_type: CType, pos) -> None:
        if self.code and isinstance(self.code[-1], ir.Ret):
            return
        if return_type == VOID:
            self.emit(ir.Ret(None, pos=pos))
            return
        zero = self.reg(return_type)
        self.emit(ir.Const(zero, 0, pos=pos))
        self.emit(ir.Ret(zero, pos=pos))


def _local_decls(stmt) -> List[A.VarDecl]:
    found: List[A.VarDecl] = []
    stack = [stmt]
    while stack:
        node = stack.pop()
        if isinstance(node, A.VarDecl):
            found.append(node)
        elif isinstance(node, A.Block):
            stack.extend(reversed(node.items))
        elif isinstance(node, A.If):
            if node.otherwise is not None:
                stack.append(node.otherwise)
            stack.append(node.then)
        elif isinstance(node, A.While):
            stack.append(node.body)
    return found


class Lowerer:
    def __init__(self, program: TypedProgram):
        self.program = program
        self.layouts = program.layouts
        self.path = program.path
        self.counters = _Counters()
        self.global_allocs: Dict[int, int] = {}

    def lower(self) -> IRProgram:
        functions: List[IRFunction] = [self._globals()]
        for func in self.program.program.functions:
            functions.append(self._function(func))
        result = IRProgram(tuple(functions), path=self.path, layouts=self.layouts)
        logger.debug(
            f"Lowered {self.path}: {self.counters.next_def - 1} defs, "
            f"{self.counters.next_use} uses, {self.counters.next_alloc} alloc sites"
        )
        return result

    def _globals(self) -> IRFunction:
        fl = _FunctionLowerer(self, ir.GLOBALS_FUNCTION)
        for decl in self.program.globals:
            self.global_allocs[decl.symbol.uid] = fl.alloc_decl(decl, AllocKind.GLOBAL)
        for decl in self.program.globals:
            fl.stmt(decl)
        fl.finish(VOID, None)
        return IRFunction(ir.GLOBALS_FUNCTION, (), (), VOID, tuple(fl.code), fl.reg_types)

    def _function(self, func: A.FunctionDecl) -> IRFunction:
        fl = _FunctionLowerer(self, func.name)
        params: List[Reg] = []
        param_types: List[CType] = []
        for p in func.params:
            ctype = PointerType(p.ctype) if isinstance(p.ctype, StructType) else p.ctype
            reg = fl.reg(ctype)
            fl.params[p.symbol.uid] = reg
            params.append(reg)
            param_types.append(p.ctype)
        for decl in _local_decls(func.body):
            fl.locals[decl.symbol.uid] = fl.alloc_decl(decl, AllocKind.STACK)
        fl.stmt(func.body)
        fl.finish(func.return_type, func.pos)
        return IRFunction(
            func.name, tuple(params), tuple(param_types), func.return_type, tuple(fl.code), fl.reg_types
        )


def lower(prog: TypedProgram) -> IRProgram:
    """
    降级已通过类型检查的程序

    每次左值写入对应一条 ``Store``, 每次内存读取对应一条 ``Load``;
    ``s.a[i] = v`` 降级为 AddrOf, FieldAddr, IndexAddr, Store。

    Args:
        prog: 类型检查后的程序

    Returns:
        IRProgram: 站点已编号的中间表示
    """
    return Lowerer(prog).lower()
