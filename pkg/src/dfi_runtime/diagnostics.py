"""
结合站点目录生成可读的违规诊断
"""

from dataclasses import dataclass
from typing import Optional

from dfi_ir.sites import SiteCatalog
from dfi_runtime.shadow import INITIAL, RELEASED, Violation
from minic.layout import describe_path


@dataclass(frozen=True)
class Diagnostic:
    kind: str  # "illegal-write" | "released" | "uninitialized"
    message: str
    use_line: Optional[int]
    def_line: Optional[int]
    field_path: str
    legal_writers: str

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "message": self.message,
            "use_line": self.use_line,
            "def_line": self.def_line,
            "field_path": self.field_path,
            "legal_writers": self.legal_writers,
        }

    def __str__(self) -> str:
        return self.message


def _line(line: Optional[int]) -> str:
    return f"L{line}" if line is not None else "L?"


def legal_writers_summary(v: Violation, catalog: SiteCatalog) -> str:
    lines = sorted(
        {catalog.def_sites[d].line for d in v.legal_defs if d != INITIAL and d in catalog.def_sites},
        key=lambda n: (n is None, n),
    )
    parts = [_line(n) for n in lines]
    if INITIAL in v.legal_defs:
        parts.append("<initial>")
    return ", ".join(parts) if parts else "none"


def diagnose(v: Violation, catalog: SiteCatalog) -> Diagnostic:
    """
    描述一次违规: 读取位置, 非法写者 (或初始/已释放状态), 被读字段槽位及合法写者

    Args:
        v: 运行时违规
        catalog: 站点目录

    Returns:
        Diagnostic: 诊断信息
    """
    use = catalog.use_sites.get(v.use_id)
    target = use.target if use else f"u{v.use_id}"
    use_line = use.line if use else None
    site = catalog.alloc_sites.get(v.alloc_site)
    field_path = describe_path(site.name if site else f"a{v.alloc_site}", v.slot_path)
    writers = legal_writers_summary(v, catalog)

    if v.observed_def == RELEASED:
        freed = f" (freed at {_line(v.released_at.line)})" if v.released_at else ""
        message = (
            f"read of {target} at {_line(use_line)} saw released memory of {field_path}{freed}; "
            f"legal writers: {writers}"
        )
        return Diagnostic("released", message, use_line, v.released_at.line if v.released_at else None,
                          field_path, writers)
    if v.observed_def == INITIAL:
        message = f"uninitialized read of {target} at {_line(use_line)}; legal writers: {writers}"
        return Diagnostic("uninitialized", message, use_line, None, field_path, writers)

    writer = catalog.def_sites.get(v.observed_def)
    def_line = writer.line if writer else None
    what = writer.target if writer else f"d{v.observed_def}"
    message = (
        f"read of {target} at {_line(use_line)} saw write from {what} at {_line(def_line)}; "
        f"legal writers: {writers}"
    )
    return Diagnostic("illegal-write", message, use_line, def_line, field_path, writers)
