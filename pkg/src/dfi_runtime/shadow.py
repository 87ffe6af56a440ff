"""
字段粒度的影子元数据: 每个对象的每个字段槽保存一个 def id
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from minic.ast_nodes import Pos
from vfa.compression import CompressedTable

INITIAL = 0
RELEASED = -1

# 一个 def id 在影子表中占用的字节数
METADATA_ENTRY_BYTES = 4


class ShadowTable:
    """影子表, 以对象基地址为键"""

    def __init__(self):
        self.entries: Dict[int, List[int]] = {}

    def attach(self, base: int, slot_count: int) -> None:
        self.entries[base] = [INITIAL] * slot_count

    def release(self, base: int) -> None:
        slots = self.entries[base]
        slots[:] = [RELEASED] * len(slots)

    def get(self, base: int, slot: int) -> int:
        return self.entries[base][slot]

    def reset(self, slots: Sequence[Tuple[object, int]]) -> None:
        for alloc, slot in slots:
            self.entries[alloc.base][slot] = INITIAL


def record_def(shadow: ShadowTable, slots: Sequence[Tuple[object, int]], def_id: int) -> None:
    """
    将列出的每个槽记为 ``def_id``

    RELEASED 不会被覆盖: 写入已释放的 chunk 不改变其元数据, 直到该 chunk 被重新分配

    Args:
        shadow: 影子表
        slots: resolve_slots 的结果
        def_id: 写站点编号
    """
    for alloc, slot in slots:
        entries = shadow.entries[alloc.base]
        if entries[slot] != RELEASED:
            entries[slot] = def_id


@dataclass(frozen=True)
class Violation:
    """
    非法 def-use 关系

    Attributes:
        use_id: 触发检查的读站点
        observed_def: 影子表中记录的最后写者 (0 为 INITIAL, -1 为 RELEASED)
        legal_set_id: 读站点对应的合法集合编号
        legal_defs: 合法集合内容
        alloc_site / alloc_base / slot / slot_path: 被读取的字段槽
    """

    use_id: int
    observed_def: int
    legal_set_id: int
    legal_defs: Tuple[int, ...]
    alloc_site: int
    alloc_base: int
    slot: int
    slot_path: str
    address: Optional[int] = None
    use_position: Optional[Pos] = field(default=None, compare=False)
    def_position: Optional[Pos] = field(default=None, compare=False)
    released_at: Optional[Pos] = field(default=None, compare=False)

    def to_dict(self) -> dict:
        def pos(p: Optional[Pos]):
            return {"line": p.line, "column": p.column} if p else None

        return {
            "use_id": self.use_id,
            "observed_def": self.observed_def,
            "legal_set_id": self.legal_set_id,
            "legal_defs": list(self.legal_defs),
            "alloc_site": self.alloc_site,
            "alloc_base": self.alloc_base,
            "slot": self.slot,
            "slot_path": self.slot_path,
            "address": self.address,
            "use_position": pos(self.use_position),
            "def_position": pos(self.def_position),
            "released_at": pos(self.released_at),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Violation":
        def pos(d):
            return Pos(d["line"], d["column"]) if d else None

        return cls(
            use_id=data["use_id"],
            observed_def=data["observed_def"],
            legal_set_id=data["legal_set_id"],
            legal_defs=tuple(data["legal_defs"]),
            alloc_site=data["alloc_site"],
            alloc_base=data["alloc_base"],
            slot=data["slot"],
            slot_path=data["slot_path"],
            address=data.get("address"),
            use_position=pos(data.get("use_position")),
            def_position=pos(data.get("def_position")),
            released_at=pos(data.get("released_at")),
        )


def check_use(
    shadow: ShadowTable, slots: Sequence[Tuple[object, int]], use_id: int, tables: CompressedTable
) -> Optional[Violation]:
    """
    检查每个槽的最后写者是否属于该读站点的合法集合

    Returns:
        Optional[Violation]: 全部通过时为 None, 否则为第一个不合法槽的 Violation
    """
    for alloc, slot in slots:
        observed = shadow.entries[alloc.base][slot]
        if observed != RELEASED and tables.contains(use_id, observed):
            continue
        return Violation(
            use_id=use_id,
            observed_def=observed,
            legal_set_id=tables.set_id(use_id),
            legal_defs=tables.legal_set(use_id),
            alloc_site=alloc.site,
            alloc_base=alloc.base,
            slot=slot,
            slot_path=alloc.layout.slot_paths[slot],
            released_at=alloc.released_at if observed == RELEASED else None,
        )
    return None
