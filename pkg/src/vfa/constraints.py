"""
字段敏感指向分析的包含约束

只有指针值的流动产生约束: 取地址, 复制, 字段偏移, 经指针读取与经指针写入。
整数运算, 比较与非指针的内存访问均被忽略。
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Tuple, Union

from config.logging_config import setup_logger
from dfi_ir import instructions as ir
from dfi_ir.sites import enumerate_sites
from minic.types import StructType

logger = setup_logger()

TOP = -1


@dataclass(frozen=True, order=True)
class AbstractLoc:
    """(分配点, 字段槽位); 槽位 ``TOP`` 表示全部槽位"""

    alloc: int
    slot: int

    def __str__(self) -> str:
        return f"a{self.alloc}.{'*' if self.slot == TOP else self.slot}"

    def widened(self) -> "AbstractLoc":
        return AbstractLoc(self.alloc, TOP)


@dataclass(frozen=True, order=True)
class RegVar:
    function: str
    register: str

    def __str__(self) -> str:
        return f"{self.function}:{self.register}"


@dataclass(frozen=True, order=True)
class RetVar:
    function: str

    def __str__(self) -> str:
        return f"{self.function}:ret"


Node = Union[RegVar, RetVar, AbstractLoc]


class ConstraintKind(Enum):
    ADDRESS_OF = "address-of"
    COPY = "copy"
    FIELD = "field"
    LOAD = "load"
    STORE = "store"


@dataclass(frozen=True)
class Constraint:
    """
    ``ADDRESS_OF``: pts(dest) >= {src}; ``COPY``: pts(dest) >= pts(src);
    ``FIELD``: pts(dest) >= pts(src) shifted by ``delta`` slots;
    ``LOAD``: pts(dest) >= pts(*src); ``STORE``: pts(*dest) >= pts(src).
    """

    kind: ConstraintKind
    dest: Node
    src: Node
    delta: int = 0

    def __str__(self) -> str:
        if self.kind is ConstraintKind.ADDRESS_OF:
            return f"{self.dest} >= {{{self.src}}}"
        if self.kind is ConstraintKind.COPY:
            return f"{self.dest} >= {self.src}"
        if self.kind is ConstraintKind.FIELD:
            return f"{self.dest} >= {self.src}+{self.delta}"
        if self.kind is ConstraintKind.LOAD:
            return f"{self.dest} >= *{self.src}"
        return f"*{self.dest} >= {self.src}"


@dataclass(frozen=True)
class ConstraintSet:
    constraints: Tuple[Constraint, ...]
    def_addresses: Dict[int, RegVar] = field(default_factory=dict)
    use_addresses: Dict[int, RegVar] = field(default_factory=dict)
    slot_counts: Dict[int, int] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.constraints)


def shift(loc: AbstractLoc, delta: int, slot_counts: Dict[int, int]) -> AbstractLoc:
    """施加字段偏移; TOP 保持不变, 越界槽位变为 TOP"""
    if loc.slot == TOP:
        return loc
    slot = loc.slot + delta
    if slot >= slot_counts.get(loc.alloc, 1):
        return loc.widened()
    return AbstractLoc(loc.alloc, slot)


def expand(loc: AbstractLoc, slot_counts: Dict[int, int]) -> Tuple[AbstractLoc, ...]:
    """``loc`` 所代表的具体槽位"""
    if loc.slot != TOP:
        return (loc,)
    return tuple(AbstractLoc(loc.alloc, s) for s in range(slot_counts.get(loc.alloc, 1)))


def _carries_pointers(ctype) -> bool:
    # struct parameters are passed by address
    return ctype.is_pointer() or isinstance(ctype, StructType)


def build_constraints(prog: ir.IRProgram) -> ConstraintSet:
    """
    按程序顺序生成已校验程序的包含约束

    Args:
        prog: 已通过 validate_ir 的程序

    Returns:
        ConstraintSet: 约束及每个 def/use 的地址寄存器
    """
    slot_counts = enumerate_sites(prog).slot_counts()
    constraints = []
    def_addresses: Dict[int, RegVar] = {}
    use_addresses: Dict[int, RegVar] = {}

    def add(kind: ConstraintKind, dest: Node, src: Node, delta: int = 0) -> None:
        constraints.append(Constraint(kind, dest, src, delta))

    for func, ins in prog.instructions():
        def reg(name: str) -> RegVar:
            return RegVar(func.name, name)

        if isinstance(ins, ir.AddrOf):
            add(ConstraintKind.ADDRESS_OF, reg(ins.dest), AbstractLoc(ins.alloc, 0))
        elif isinstance(ins, ir.Alloc) and ins.dest is not None:
            add(ConstraintKind.ADDRESS_OF, reg(ins.dest), AbstractLoc(ins.alloc, 0))
        elif isinstance(ins, ir.FieldAddr):
            add(ConstraintKind.FIELD, reg(ins.dest), reg(ins.base), ins.slot_delta)
        elif isinstance(ins, ir.IndexAddr):
            # indexing never changes the slot
            add(ConstraintKind.COPY, reg(ins.dest), reg(ins.base))
        elif isinstance(ins, ir.Load):
            use_addresses[ins.use] = reg(ins.addr)
            if ins.ctype.is_pointer():
                add(ConstraintKind.LOAD, reg(ins.dest), reg(ins.addr))
        elif isinstance(ins, ir.Store):
            def_addresses[ins.def_] = reg(ins.addr)
            if ins.ctype.is_pointer():
                add(ConstraintKind.STORE, reg(ins.addr), reg(ins.value))
        elif isinstance(ins, ir.Call):
            callee = prog.function(ins.func)
            for arg, param, ptype in zip(ins.args, callee.params, callee.param_types):
                if _carries_pointers(ptype):
                    add(ConstraintKind.COPY, RegVar(callee.name, param), reg(arg))
            if ins.dest is not None and callee.return_type.is_pointer():
                add(ConstraintKind.COPY, reg(ins.dest), RetVar(callee.name))
        elif isinstance(ins, ir.Ret):
            if ins.value is not None and func.return_type.is_pointer():
                add(ConstraintKind.COPY, RetVar(func.name), reg(ins.value))

    logger.debug(f"Built {len(constraints)} constraints for {prog.path}")
    return ConstraintSet(tuple(constraints), def_addresses, use_addresses, slot_counts)
