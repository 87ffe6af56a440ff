"""
参考求值器: 直接在 Ast 上执行 TypedProgram

除布局计算外不与 IR 流水线共享任何代码, 用作降级后程序 baseline 语义的对照。
内存是顺序分配的平坦字节数组, 没有大小类和元数据, 栈帧不回收。
"""

from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional

from fsdfi_errors import MemoryFault, ResourceLimit
from minic import ast_nodes as A
from minic.typechecker import TypedProgram
from minic.types import (
    CType,
    PointerType,
    StructType,
    c_divide,
    decode_scalar,
    encode_scalar,
    narrow,
    scalar_size,
    wrap32,
)

NULL_GUARD = 4096


@dataclass
class EvalResult:
    transcript: List[int] = field(default_factory=list)
    steps: int = 0


class _Return(Exception):
    def __init__(self, value: Optional[int]):
        super().__init__()
        self.value = value


@dataclass
class _Frame:
    addresses: Dict[int, int] = field(default_factory=dict)  # symbol uid -> address
    registers: Dict[int, int] = field(default_factory=dict)  # scalar params


class ReferenceEvaluator:
    def __init__(self, program: TypedProgram, budget: int):
        self.program = program
        self.layouts = program.layouts
        self.budget = budget
        self.memory = bytearray(NULL_GUARD)
        self.globals: Dict[int, int] = {}
        self.result = EvalResult()

    # -- memory ------------------------------------------------------------

    def _allocate(self, ctype: CType, count: int = 1) -> int:
        layout = self.layouts.layout(ctype)
        base = (len(self.memory) + 7) // 8 * 8
        self.memory.extend(b"\x00" * (base - len(self.memory) + layout.size * count))
        return base

    def _check(self, address: int, size: int) -> None:
        if address < NULL_GUARD:
            raise MemoryFault("null pointer dereference", address=address)
        if address + size > len(self.memory):
            raise MemoryFault(f"access outside evaluator memory at {address:#x}", address=address)

    def _load(self, address: int, ctype: CType) -> int:
        size = scalar_size(ctype)
        self._check(address, size)
        return decode_scalar(self.memory[address : address + size], ctype)

    def _store(self, address: int, ctype: CType, value: int) -> None:
        size = scalar_size(ctype)
        self._check(address, size)
        self.memory[address : address + size] = encode_scalar(value, ctype)

    def _tick(self) -> None:
        self.result.steps += 1
        if self.result.steps > self.budget:
            raise ResourceLimit(f"instruction budget of {self.budget} exhausted")

    # -- entry -------------------------------------------------------------

    def run(self, inputs: Optional[Mapping[str, int]] = None) -> EvalResult:
        frame = _Frame()
        for decl in self.program.globals:
            self.globals[decl.symbol.uid] = self._allocate(decl.ctype)
        for decl in self.program.globals:
            if decl.init is not None:
                self._store(self.globals[decl.symbol.uid], decl.ctype, self._rvalue(decl.init, frame))
        for name, value in (inputs or {}).items():
            decl = next(d for d in self.program.globals if d.name == name)
            self._store(self.globals[decl.symbol.uid], decl.ctype, value)
        self._call(self.program.function("main"), [])
        return self.result

    def _call(self, func: A.FunctionDecl, args: List[int]) -> Optional[int]:
        frame = _Frame()
        for param, value in zip(func.params, args):
            if isinstance(param.ctype, StructType):
                frame.addresses[param.symbol.uid] = value
            else:
                frame.registers[param.symbol.uid] = narrow(value, param.ctype)
        for decl in _local_decls(func.body):
            frame.addresses[decl.symbol.uid] = self._allocate(decl.ctype)
        try:
            self._exec(func.body, frame)
        except _Return as ret:
            if ret.value is None:
                return None
            return narrow(ret.value, func.return_type)
        return None

    # -- statements --------------------------------------------------------

    def _exec(self, stmt, frame: _Frame) -> None:
        self._tick()
        if isinstance(stmt, A.VarDecl):
            if stmt.init is not None:
                value = self._rvalue(stmt.init, frame)
                self._store(frame.addresses[stmt.symbol.uid], stmt.ctype, value)
        elif isinstance(stmt, A.Block):
            for item in stmt.items:
                self._exec(item, frame)
        elif isinstance(stmt, A.Assign):
            value = self._rvalue(stmt.value, frame)
            self._store(self._address(stmt.target, frame), stmt.target.ctype, value)
        elif isinstance(stmt, A.If):
            if self._rvalue(stmt.cond, frame):
                self._exec(stmt.then, frame)
            elif stmt.otherwise is not None:
                self._exec(stmt.otherwise, frame)
        elif isinstance(stmt, A.While):
            while self._rvalue(stmt.cond, frame):
                self._exec(stmt.body, frame)
                self._tick()
        elif isinstance(stmt, A.Return):
            raise _Return(self._rvalue(stmt.value, frame) if stmt.value is not None else None)
        elif isinstance(stmt, A.Print):
            self.result.transcript.append(self._rvalue(stmt.value, frame))
        elif isinstance(stmt, A.Free):
            # the reference memory never reuses storage
            self._rvalue(stmt.pointer, frame)
        elif isinstance(stmt, A.ExprStmt):
            self._rvalue(stmt.expr, frame)
        else:
            raise TypeError(f"unexpected statement {type(stmt).__name__}")

    # -- expressions -------------------------------------------------------

    def _address(self, expr: A.Expr, frame: _Frame) -> int:
        if isinstance(expr, A.VarRef):
            uid = expr.symbol.uid
            if uid in frame.addresses:
                return frame.addresses[uid]
            return self.globals[uid]
        if isinstance(expr, A.FieldAccess):
            if expr.arrow:
                base = self._rvalue(expr.base, frame)
                struct_name = expr.base.ctype.target.name
            else:
                base = self._address(expr.base, frame)
                struct_name = expr.base.ctype.name
            if base < NULL_GUARD:
                raise MemoryFault("null pointer dereference", address=base)
            return base + self.layouts.field_info(struct_name, expr.field_name).offset
        if isinstance(expr, A.Index):
            if isinstance(expr.base.ctype, PointerType):
                base = self._rvalue(expr.base, frame)
            else:
                base = self._address(expr.base, frame)
            if base < NULL_GUARD:
                raise MemoryFault("null pointer dereference", address=base)
            index = self._rvalue(expr.index, frame)
            return base + index * self.layouts.size_of(expr.ctype)
        if isinstance(expr, A.Deref):
            return self._rvalue(expr.operand, frame)
        raise TypeError(f"not an lvalue: {type(expr).__name__}")

    def _rvalue(self, expr: A.Expr, frame: _Frame) -> int:
        if isinstance(expr, (A.IntLit, A.CharLit)):
            return expr.value
        if isinstance(expr, A.VarRef) and expr.symbol.uid in frame.registers:
            return frame.registers[expr.symbol.uid]
        if isinstance(expr, (A.VarRef, A.FieldAccess, A.Index, A.Deref)):
            return self._load(self._address(expr, frame), expr.ctype)
        if isinstance(expr, A.AddrOf):
            return self._address(expr.operand, frame)
        if isinstance(expr, A.Unary):
            return wrap32(-self._rvalue(expr.operand, frame))
        if isinstance(expr, A.Binary):
            return self._binary(expr, frame)
        if isinstance(expr, A.Call):
            func = self.program.function(expr.name)
            args = []
            for arg, param in zip(expr.args, func.params):
                if isinstance(param.ctype, StructType):
                    args.append(self._address(arg, frame))
                else:
                    args.append(self._rvalue(arg, frame))
            result = self._call(func, args)
            return 0 if result is None else result
        if isinstance(expr, A.Malloc):
            count = 1 if expr.count is None else self._rvalue(expr.count, frame)
            if count <= 0:
                return 0
            return self._allocate(expr.element_type, count)
        raise TypeError(f"unexpected expression {type(expr).__name__}")

    def _binary(self, expr: A.Binary, frame: _Frame) -> int:
        left = self._rvalue(expr.left, frame)
        right = self._rvalue(expr.right, frame)
        op = expr.op
        if op == "+":
            return wrap32(left + right)
        if op == "-":
            return wrap32(left - right)
        if op == "*":
            return wrap32(left * right)
        if op == "/":
            if right == 0:
                raise MemoryFault("division by zero")
            return c_divide(left, right)
        return int(
            {
                "<": left < right,
                "<=": left <= right,
                ">": left > right,
                ">=": left >= right,
                "==": left == right,
                "!=": left != right,
            }[op]
        )


def _local_decls(stmt) -> List[A.VarDecl]:
    found: List[A.VarDecl] = []

    def visit(node) -> None:
        if isinstance(node, A.VarDecl):
            found.append(node)
        elif isinstance(node, A.Block):
            for item in node.items:
                visit(item)
        elif isinstance(node, A.If):
            visit(node.then)
            if node.otherwise is not None:
                visit(node.otherwise)
        elif isinstance(node, A.While):
            visit(node.body)

    visit(stmt)
    return found


def evaluate(
    program: TypedProgram, inputs: Optional[Mapping[str, int]] = None, budget: int = 10**7
) -> EvalResult:
    """运行 ``main`` 并返回 print 输出序列"""
    return ReferenceEvaluator(program, budget).run(inputs)
