"""
字节精确的 C 对象布局与字段槽展开

``TypeLayout`` 即常规 C 布局 (声明顺序, 自然对齐, 大小按结构体对齐取整), 并标注
*字段槽*, 即维护元数据的单位:

* 嵌套结构体展开到叶子字段;
* 标量或指针数组整体占一个槽;
* 结构体数组的每个元素重复该结构体的槽, 且所有元素共用相同的槽编号;
* 填充字节属于其前面的槽。

布局与是否开启保护无关。
"""

from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from fsdfi_errors import LayoutError
from minic.ast_nodes import StructDecl
from minic.types import (
    ArrayType,
    CharType,
    CType,
    IntType,
    PointerType,
    StructType,
    VoidType,
    scalar_size,
)


@dataclass(frozen=True)
class FieldSlot:
    """字段槽拥有的一段连续字节"""

    slot: int
    offset: int
    length: int
    path: str

    def to_list(self) -> list:
        return [self.slot, self.offset, self.length, self.path]


@dataclass(frozen=True)
class StructField:
    name: str
    ctype: CType
    offset: int
    slot_start: int
    slot_count: int


@dataclass(frozen=True)
class TypeLayout:
    ctype: CType
    size: int
    align: int
    segments: Tuple[FieldSlot, ...]
    slot_paths: Tuple[str, ...]
    _starts: Tuple[int, ...] = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_starts", tuple(s.offset for s in self.segments))

    @property
    def slot_count(self) -> int:
        return len(self.slot_paths)

    @property
    def last_slot(self) -> int:
        return self.segments[-1].slot

    def slot_at(self, offset: int) -> int:
        """字节 ``offset`` 所属的槽; 超出 ``size`` 的字节属于最后一个槽"""
        if offset >= self.size:
            return self.last_slot
        if offset < 0:
            raise ValueError(f"negative offset {offset}")
        return self.segments[bisect_right(self._starts, offset) - 1].slot

    def to_dict(self) -> dict:
        return {
            "type": str(self.ctype),
            "size": self.size,
            "align": self.align,
            "slots": [s.to_list() for s in self.segments],
        }


def _align_up(value: int, align: int) -> int:
    return (value + align - 1) // align * align


def _join(prefix: str, name: str) -> str:
    return f"{prefix}.{name}" if prefix else name


class LayoutCalculator:
    """
    计算并缓存一个程序中各结构体声明的布局
    """

    def __init__(self, structs: Mapping[str, StructDecl]):
        self._structs: Dict[str, StructDecl] = dict(structs)
        self._cache: Dict[CType, TypeLayout] = {}
        self._fields: Dict[str, Tuple[StructField, ...]] = {}

    @classmethod
    def from_decls(cls, decls: Sequence[StructDecl]) -> "LayoutCalculator":
        return cls({d.name: d for d in decls})

    @property
    def struct_names(self) -> List[str]:
        return list(self._structs)

    def layout(self, ctype: CType) -> TypeLayout:
        cached = self._cache.get(ctype)
        if cached is not None:
            return cached
        size, align, segments = self._flatten(ctype, "", ())
        paths: Dict[int, str] = {}
        for seg in segments:
            paths.setdefault(seg.slot, seg.path)
        result = TypeLayout(
            ctype=ctype,
            size=size,
            align=align,
            segments=tuple(segments),
            slot_paths=tuple(paths[i] for i in range(len(paths))),
        )
        self._cache[ctype] = result
        return result

    def size_of(self, ctype: CType) -> int:
        return self.layout(ctype).size

    def struct_fields(self, name: str) -> Tuple[StructField, ...]:
        if name not in self._fields:
            self.layout(StructType(name))
        return self._fields[name]

    def field_info(self, struct_name: str, field_name: str) -> StructField:
        for info in self.struct_fields(struct_name):
            if info.name == field_name:
                return info
        raise LayoutError(f"struct {struct_name} has no field '{field_name}'")

    # ------------------------------------------------------------------

    def _flatten(
        self, ctype: CType, prefix: str, active: Tuple[str, ...]
    ) -> Tuple[int, int, List[FieldSlot]]:
        if isinstance(ctype, (IntType, CharType, PointerType)):
            size = scalar_size(ctype)
            return size, size, [FieldSlot(0, 0, size, prefix)]
        if isinstance(ctype, ArrayType):
            return self._flatten_array(ctype, prefix, active)
        if isinstance(ctype, StructType):
            return self._flatten_struct(ctype, prefix, active)
        if isinstance(ctype, VoidType):
            raise LayoutError("void has no layout")
        raise LayoutError(f"cannot lay out {ctype}")

    def _flatten_array(self, ctype: ArrayType, prefix: str, active):
        if ctype.length <= 0:
            raise LayoutError(f"array length must be positive in {ctype}")
        elem_size, elem_align, elem_segments = self._flatten(
            ctype.element, prefix + "[*]", active
        )
        total = elem_size * ctype.length
        if not _contains_struct(ctype.element):
            return total, elem_align, [FieldSlot(0, 0, total, prefix)]
        segments = []
        for i in range(ctype.length):
            base = i * elem_size
            for seg in elem_segments:
                segments.append(FieldSlot(seg.slot, base + seg.offset, seg.length, seg.path))
        return total, elem_align, segments

    def _flatten_struct(self, ctype: StructType, prefix: str, active):
        decl = self._structs.get(ctype.name)
        if decl is None:
            raise LayoutError(f"struct {ctype.name} is not declared")
        if ctype.name in active:
            raise LayoutError(
                f"struct {ctype.name} contains itself by value",
                line=decl.pos.line if decl.pos else None,
                column=decl.pos.column if decl.pos else None,
            )
        if not decl.fields:
            raise LayoutError(f"struct {ctype.name} has no fields")
        active = active + (ctype.name,)

        offset = 0
        align = 1
        segments: List[FieldSlot] = []
        fields: List[StructField] = []
        next_slot = 0
        for fdecl in decl.fields:
            fsize, falign, fsegs = self._flatten(fdecl.ctype, _join(prefix, fdecl.name), active)
            start = _align_up(offset, falign)
            if start > offset and segments:
                # padding goes to the preceding slot
                last = segments[-1]
                segments[-1] = FieldSlot(last.slot, last.offset, last.length + start - offset, last.path)
            slot_count = max(s.slot for s in fsegs) + 1
            for seg in fsegs:
                segments.append(FieldSlot(seg.slot + next_slot, seg.offset + start, seg.length, seg.path))
            fields.append(StructField(fdecl.name, fdecl.ctype, start, next_slot, slot_count))
            next_slot += slot_count
            offset = start + fsize
            align = max(align, falign)

        size = _align_up(offset, align)
        if size > offset:
            last = segments[-1]
            segments[-1] = FieldSlot(last.slot, last.offset, last.length + size - offset, last.path)
        # offsets and slot numbers are relative to the struct itself
        self._fields.setdefault(ctype.name, tuple(fields))
        return size, align, segments


def _contains_struct(ctype: CType) -> bool:
    while isinstance(ctype, ArrayType):
        ctype = ctype.element
    return isinstance(ctype, StructType)


def compute_layout(ctype: CType, structs: Mapping[str, StructDecl]) -> TypeLayout:
    """
    计算 ``ctype`` 在给定结构体声明下的布局

    Args:
        ctype: 对象类型
        structs: 结构体名到声明的映射

    Returns:
        TypeLayout: 大小、对齐与字段槽

    Raises:
        LayoutError: 结构体按值包含自身
    """
    return LayoutCalculator(structs).layout(ctype)


def flatten_fields(layout: TypeLayout) -> Tuple[FieldSlot, ...]:
    """
    按偏移顺序列出布局中互不相同的字段槽

    每项为该槽的第一个字节区间; 结构体数组中各元素共用同一个槽。
    """
    seen: Dict[int, FieldSlot] = {}
    for seg in layout.segments:
        if seg.slot not in seen:
            seen[seg.slot] = seg
    return tuple(sorted(seen.values(), key=lambda s: s.offset))


def describe_path(root: str, path: str) -> str:
    """拼接变量名与槽路径 (``s`` + ``a[*]`` -> ``s.a[*]``)"""
    if not path:
        return root
    if path.startswith("["):
        return root + path
    return f"{root}.{path}"


def layouts_for_program(calculator: LayoutCalculator, names: Optional[Sequence[str]] = None) -> Dict[str, dict]:
    """导出全部 (或指定) 结构体类型的布局, 用于黄金文件"""
    result = {}
    for name in names if names is not None else calculator.struct_names:
        result[name] = calculator.layout(StructType(name)).to_dict()
    return result
