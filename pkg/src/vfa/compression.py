"""
LegalDefTable 的共享集合压缩
"""

from bisect import bisect_left
from dataclasses import dataclass
from typing import Dict, Tuple

from vfa.legal_defs import LegalDefTable


@dataclass(frozen=True)
class CompressedTable:
    """
    压缩后的合法定义表

    Attributes:
        use_to_set: 以 use id 为下标的集合编号
        sets: 以集合编号为下标的有序 def id 列表, 编号按首次出现顺序从 0 开始
    """

    use_to_set: Tuple[int, ...]
    sets: Tuple[Tuple[int, ...], ...]
    strict_init: bool = False
    granularity: str = "field"

    @property
    def set_count(self) -> int:
        return len(self.sets)

    @property
    def entry_count(self) -> int:
        """存储的整数个数: 每个 use 一个集合编号, 加上全部集合成员"""
        return len(self.use_to_set) + sum(len(s) for s in self.sets)

    def set_id(self, use: int) -> int:
        return self.use_to_set[use]

    def legal_set(self, use: int) -> Tuple[int, ...]:
        return self.sets[self.use_to_set[use]]

    def contains(self, use: int, def_id: int) -> bool:
        members = self.legal_set(use)
        i = bisect_left(members, def_id)
        return i < len(members) and members[i] == def_id

    def decompress(self) -> LegalDefTable:
        return LegalDefTable(
            tuple(self.sets[i] for i in self.use_to_set), self.strict_init, self.granularity
        )

    def to_dict(self) -> dict:
        return {
            "granularity": self.granularity,
            "strict_init": self.strict_init,
            "use_to_set": list(self.use_to_set),
            "sets": [list(s) for s in self.sets],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CompressedTable":
        return cls(
            use_to_set=tuple(int(i) for i in data["use_to_set"]),
            sets=tuple(tuple(int(d) for d in s) for s in data["sets"]),
            strict_init=bool(data.get("strict_init", False)),
            granularity=data.get("granularity", "field"),
        )


def compress_sets(table: LegalDefTable) -> CompressedTable:
    """把相同的合法集合去重为连续的共享集合编号"""
    ids: Dict[Tuple[int, ...], int] = {}
    use_to_set = []
    for members in table.sets:
        key = tuple(sorted(members))
        if key not in ids:
            ids[key] = len(ids)
        use_to_set.append(ids[key])
    return CompressedTable(tuple(use_to_set), tuple(ids), table.strict_init, table.granularity)
