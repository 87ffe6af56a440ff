"""
DFI 中间表示的指令集

寄存器是函数内局部的 ``%N``, 只赋值一次。运行时只跟踪内存:
每条 ``Store`` 带一个 def id (从 1 连续编号), 每条 ``Load`` 带一个 use id (从 0 连续编号)。
"""

import hashlib
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Dict, Mapping, Optional, Tuple

from minic.ast_nodes import Pos
from minic.layout import LayoutCalculator
from minic.types import CType

Reg = str

GLOBALS_FUNCTION = "__globals__"
ENTRY_FUNCTION = "main"


class AllocKind(Enum):
    """分配点类别"""

    GLOBAL = "global"
    STACK = "stack"
    HEAP = "heap"


@dataclass(frozen=True)
class Instr:
    pos: Optional[Pos] = field(default=None, compare=False, kw_only=True)

    def defined(self) -> Tuple[Reg, ...]:
        dest = getattr(self, "dest", None)
        return (dest,) if dest is not None else ()

    def used(self) -> Tuple[Reg, ...]:
        return ()


@dataclass(frozen=True)
class Const(Instr):
    dest: Reg
    value: int


@dataclass(frozen=True)
class AddrOf(Instr):
    """全局或栈分配点当前实例的地址"""

    dest: Reg
    alloc: int


@dataclass(frozen=True)
class FieldAddr(Instr):
    """``dest = base + offset``; 字段首个槽位位于 base 槽位之后 ``slot_delta`` 处"""

    dest: Reg
    base: Reg
    offset: int
    slot_delta: int
    path: str

    def used(self):
        return (self.base,)


@dataclass(frozen=True)
class IndexAddr(Instr):
    dest: Reg
    base: Reg
    index: Reg
    elem_size: int

    def used(self):
        return (self.base, self.index)


@dataclass(frozen=True)
class Load(Instr):
    dest: Reg
    addr: Reg
    ctype: CType
    use: int
    target: str = field(default="", compare=False)

    def used(self):
        return (self.addr,)


@dataclass(frozen=True)
class Store(Instr):
    addr: Reg
    value: Reg
    ctype: CType
    def_: int
    target: str = field(default="", compare=False)

    def used(self):
        return (self.addr, self.value)


@dataclass(frozen=True)
class Alloc(Instr):
    """
    分配点实例

    全局与栈分配点没有 ``dest`` (地址由 ``AddrOf`` 取得); 堆分配点返回新指针, 失败时返回 NULL。
    """

    dest: Optional[Reg]
    alloc: int
    kind: AllocKind
    ctype: CType
    name: str = ""
    count: Optional[Reg] = None

    def used(self):
        return (self.count,) if self.count is not None else ()


@dataclass(frozen=True)
class Free(Instr):
    addr: Reg

    def used(self):
        return (self.addr,)


@dataclass(frozen=True)
class BinOp(Instr):
    dest: Reg
    op: str
    left: Reg
    right: Reg

    def used(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Neg(Instr):
    dest: Reg
    operand: Reg

    def used(self):
        return (self.operand,)


@dataclass(frozen=True)
class Call(Instr):
    dest: Optional[Reg]
    func: str
    args: Tuple[Reg, ...] = ()

    def used(self):
        return self.args


@dataclass(frozen=True)
class Ret(Instr):
    value: Optional[Reg] = None

    def used(self):
        return (self.value,) if self.value is not None else ()


@dataclass(frozen=True)
class Branch(Instr):
    cond: Reg
    if_true: str
    if_false: str

    def used(self):
        return (self.cond,)


@dataclass(frozen=True)
class Jump(Instr):
    label: str


@dataclass(frozen=True)
class Label(Instr):
    name: str


@dataclass(frozen=True)
class Print(Instr):
    value: Reg

    def used(self):
        return (self.value,)


@dataclass(frozen=True)
class IRFunction:
    name: str
    params: Tuple[Reg, ...]
    param_types: Tuple[CType, ...]
    return_type: CType
    instructions: Tuple[Instr, ...]
    reg_types: Mapping[Reg, CType] = field(default_factory=dict, compare=False)

    @cached_property
    def labels(self) -> Dict[str, int]:
        return {ins.name: i for i, ins in enumerate(self.instructions) if isinstance(ins, Label)}


@dataclass(frozen=True)
class IRProgram:
    functions: Tuple[IRFunction, ...]
    path: str = "<input>"
    layouts: Optional[LayoutCalculator] = field(default=None, compare=False, repr=False)

    @cached_property
    def by_name(self) -> Dict[str, IRFunction]:
        return {f.name: f for f in self.functions}

    def function(self, name: str) -> IRFunction:
        return self.by_name[name]

    def instructions(self):
        """按程序顺序产出 (函数, 指令) 对"""
        for func in self.functions:
            for ins in func.instructions:
                yield func, ins

    @cached_property
    def content_hash(self) -> str:
        """文本 IR 的 SHA-256, 用于把分析表绑定到本程序"""
        from dfi_ir.text import format_ir

        return hashlib.sha256(format_ir(self).encode("utf-8")).hexdigest()
