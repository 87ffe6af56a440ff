"""
站点目录模块

定义站点 (def / use / alloc) 及其目录, 目录由扫描 IR 得到, 与 Store / Load / Alloc 指令一一对应。
"""

from dataclasses import dataclass, field
from typing import Dict, Optional

from config.logging_config import setup_logger
from dfi_ir.instructions import Alloc, AllocKind, IRProgram, Load, Store
from minic.ast_nodes import Pos
from minic.types import ArrayType, CType

logger = setup_logger()


def _pos_dict(pos: Optional[Pos]) -> Optional[dict]:
    return {"line": pos.line, "column": pos.column} if pos else None


@dataclass(frozen=True)
class AccessSite:
    """
    内存访问站点 (写为 def, 读为 use)

    Attributes:
        id: 站点编号
        function: 所在函数
        pos: 源码位置
        target: 静态可知的访问目标描述, 如 ``s.a[*]``、``p->x``
    """

    id: int
    function: str
    pos: Optional[Pos]
    target: str

    @property
    def line(self) -> Optional[int]:
        return self.pos.line if self.pos else None

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "function": self.function,
            "position": _pos_dict(self.pos),
            "target": self.target,
        }


class DefSite(AccessSite):
    pass


class UseSite(AccessSite):
    pass


@dataclass(frozen=True)
class AllocSite:
    """
    分配点

    Attributes:
        id: 分配点编号
        kind: global / stack / heap
        ctype: 对象类型 (堆分配为元素类型)
        name: 变量名 (堆分配为 ``malloc@L<行号>``)
        slot_count: 字段槽数量
    """

    id: int
    kind: AllocKind
    ctype: CType
    name: str
    function: str
    pos: Optional[Pos]
    slot_count: int

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind.value,
            "type": str(self.ctype),
            "name": self.name,
            "function": self.function,
            "position": _pos_dict(self.pos),
            "slot_count": self.slot_count,
        }


@dataclass(frozen=True)
class SiteCatalog:
    def_sites: Dict[int, DefSite] = field(default_factory=dict)
    use_sites: Dict[int, UseSite] = field(default_factory=dict)
    alloc_sites: Dict[int, AllocSite] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "defs": [self.def_sites[k].to_dict() for k in sorted(self.def_sites)],
            "uses": [self.use_sites[k].to_dict() for k in sorted(self.use_sites)],
            "allocs": [self.alloc_sites[k].to_dict() for k in sorted(self.alloc_sites)],
        }

    def slot_counts(self) -> Dict[int, int]:
        return {k: site.slot_count for k, site in self.alloc_sites.items()}


def enumerate_sites(prog: IRProgram) -> SiteCatalog:
    """
    扫描 IR, 生成站点目录

    Args:
        prog (IRProgram): 已降级的程序

    Returns:
        SiteCatalog: def / use / alloc 站点目录, 编号与指令中的一致
    """
    catalog = SiteCatalog()
    for func, ins in prog.instructions():
        if isinstance(ins, Store):
            catalog.def_sites[ins.def_] = DefSite(ins.def_, func.name, ins.pos, ins.target)
        elif isinstance(ins, Load):
            catalog.use_sites[ins.use] = UseSite(ins.use, func.name, ins.pos, ins.target)
        elif isinstance(ins, Alloc):
            layout = prog.layouts.layout(ins.ctype) if prog.layouts is not None else None
            catalog.alloc_sites[ins.alloc] = AllocSite(
                id=ins.alloc,
                kind=ins.kind,
                ctype=ins.ctype,
                name=ins.name,
                function=func.name,
                pos=ins.pos,
                slot_count=layout.slot_count if layout is not None else 1,
            )
    logger.debug(
        f"Enumerated {len(catalog.def_sites)} defs, {len(catalog.use_sites)} uses, "
        f"{len(catalog.alloc_sites)} alloc sites in {prog.path}"
    )
    return catalog


def heap_layout_type(element: CType, count: int) -> CType:
    """``count`` 个元素的堆块与单个元素共用槽位编号"""
    return element if count == 1 else ArrayType(element, count)
