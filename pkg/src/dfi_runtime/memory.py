"""
按大小类划分的模拟内存

arena 占用地址 ``[arena_size, 2 * arena_size)``, 其下的地址 (包括 NULL) 均未映射。
arena 按大小类均分为 2 的幂大小的区域, 对象放在能容纳它的最小 class 的 chunk 中,
字段偏移沿用前端计算的布局。任意内部地址的所属 chunk 为 ``address & ~(class - 1)``。
"""

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from config import config as cfg
from config.logging_config import setup_logger
from dfi_runtime.shadow import ShadowTable
from fsdfi_errors import AllocFailure, ConfigError, FreeError, MemoryFault
from minic.ast_nodes import Pos
from minic.layout import TypeLayout

logger = setup_logger()

MIN_ARENA_SIZE = 64 * 1024
NULL_PAGE = 4096


def _is_power_of_two(value: int) -> bool:
    return value > 0 and value & (value - 1) == 0


@dataclass
class Allocation:
    base: int
    site: int
    layout: TypeLayout
    chunk_size: int
    live: bool = True
    released_at: Optional[Pos] = None

    @property
    def size(self) -> int:
        return self.layout.size

    @property
    def slot_count(self) -> int:
        return self.layout.slot_count


class MemoryImage:
    def __init__(self, arena_size: int, min_class: int, max_class: int):
        self.arena_size = arena_size
        self.base_address = arena_size
        self.data = bytearray(arena_size)
        self.classes: List[int] = []
        size = min_class
        while size <= max_class:
            self.classes.append(size)
            size <<= 1
        region = 1
        while region * 2 <= arena_size // len(self.classes):
            region *= 2
        self.region_size = region
        self.cursors: Dict[int, int] = {}
        self.free_lists: Dict[int, List[int]] = {}
        for i, cls in enumerate(self.classes):
            self.cursors[cls] = self.base_address + i * region
            self.free_lists[cls] = []
        self.chunks: Dict[int, Allocation] = {}
        self.shadow = ShadowTable()
        self.live_bytes = 0
        self.live_slots = 0
        self.peak_bytes = 0
        self.peak_slots = 0

    @property
    def min_class(self) -> int:
        return self.classes[0]

    @property
    def max_class(self) -> int:
        return self.classes[-1]

    def class_for(self, size: int) -> int:
        cls = self.min_class
        while cls < size:
            cls <<= 1
        return cls

    def region_end(self, cls: int) -> int:
        return self.base_address + (self.classes.index(cls) + 1) * self.region_size

    def class_at(self, address: int) -> Optional[int]:
        index = (address - self.base_address) // self.region_size
        if address < self.base_address or index >= len(self.classes):
            return None
        return self.classes[index]

    def owner(self, address: int) -> Optional[Allocation]:
        """掩码定位所属对象, 未映射地址返回 None"""
        cls = self.class_at(address)
        if cls is None:
            return None
        return self.chunks.get(address & ~(cls - 1))

    def linear_owner(self, address: int) -> Optional[Allocation]:
        for alloc in self.chunks.values():
            if alloc.base <= address < alloc.base + alloc.chunk_size:
                return alloc
        return None

    def live_allocations(self) -> List[Allocation]:
        return [a for a in self.chunks.values() if a.live]

    def read(self, address: int, size: int) -> bytes:
        start = address - self.base_address
        return bytes(self.data[start : start + size])

    def write(self, address: int, data: bytes) -> None:
        start = address - self.base_address
        self.data[start : start + len(data)] = data

    def _account(self, alloc: Allocation, sign: int) -> None:
        self.live_bytes += sign * alloc.size
        self.live_slots += sign * alloc.slot_count
        self.peak_bytes = max(self.peak_bytes, self.live_bytes)
        self.peak_slots = max(self.peak_slots, self.live_slots)


def init_memory(
    arena_size: int = cfg.FSDFI_ARENA_SIZE,
    min_class: int = cfg.FSDFI_MIN_CLASS,
    max_class: int = cfg.FSDFI_MAX_CLASS,
) -> MemoryImage:
    """
    创建空的内存映像

    Raises:
        ConfigError: arena 或 size class 不是 2 的幂, arena 小于 64 KiB, 或每个 class 的区域容不下最大 class
    """
    if not _is_power_of_two(arena_size):
        raise ConfigError(f"arena size {arena_size} is not a power of two")
    if arena_size < MIN_ARENA_SIZE:
        raise ConfigError(f"arena size {arena_size} is below {MIN_ARENA_SIZE} bytes")
    if not (_is_power_of_two(min_class) and _is_power_of_two(max_class)):
        raise ConfigError(f"size classes {min_class}..{max_class} must be powers of two")
    if min_class > max_class:
        raise ConfigError(f"minimum class {min_class} exceeds maximum class {max_class}")
    image = MemoryImage(arena_size, min_class, max_class)
    if image.region_size < max_class:
        raise ConfigError(
            f"arena of {arena_size} bytes cannot hold a {max_class}-byte chunk per size class"
        )
    logger.debug(
        f"Memory image: arena {arena_size} bytes, classes {min_class}..{max_class}, "
        f"region {image.region_size} bytes"
    )
    return image


def allocate(img: MemoryImage, layout: TypeLayout, site: int) -> int:
    """
    在最小可容纳的 size class 中分配对象, 字节清零, 影子槽置为 INITIAL

    Returns:
        int: 对齐到 chunk 大小的基地址

    Raises:
        AllocFailure: 对象超过最大 class 或该 class 区域耗尽
    """
    if layout.size > img.max_class:
        raise AllocFailure(f"object of {layout.size} bytes exceeds the largest size class {img.max_class}")
    cls = img.class_for(layout.size)
    free_list = img.free_lists[cls]
    if free_list:
        base = free_list.pop()
    else:
        base = img.cursors[cls]
        if base + cls > img.region_end(cls):
            raise AllocFailure(f"size class {cls} is exhausted")
        img.cursors[cls] = base + cls
    img.write(base, b"\x00" * cls)
    alloc = Allocation(base=base, site=site, layout=layout, chunk_size=cls)
    img.chunks[base] = alloc
    img.shadow.attach(base, layout.slot_count)
    img._account(alloc, +1)
    return base


def deallocate(img: MemoryImage, base: int, released_at: Optional[Pos] = None) -> None:
    """
    释放对象: 影子槽置为 RELEASED, 字节保留

    Raises:
        FreeError: 重复释放, 或地址不是某个对象的基地址
    """
    alloc = img.chunks.get(base)
    if alloc is None:
        owner = img.owner(base)
        if owner is not None:
            raise FreeError(f"free of interior address {base:#x} (object at {owner.base:#x})")
        raise FreeError(f"free of unknown address {base:#x}")
    if not alloc.live:
        raise FreeError(f"double free of {base:#x}")
    alloc.live = False
    alloc.released_at = released_at
    img.shadow.release(base)
    img.free_lists[alloc.chunk_size].append(base)
    img._account(alloc, -1)


def resolve_slots(img: MemoryImage, address: int, length: int) -> List[Tuple[Allocation, int]]:
    """
    将 [address, address+length) 的每个字节映射到其所属对象的字段槽

    超出对象大小但仍在 chunk 内的字节属于最后一个槽。已释放的 chunk 依然可解析
    (其影子为 RELEASED)。

    Raises:
        MemoryFault: 任一字节未映射
    """
    result: List[Tuple[Allocation, int]] = []
    seen = set()
    for a in range(address, address + length):
        alloc = img.owner(a)
        if alloc is None:
            what = "null pointer dereference" if 0 <= a < NULL_PAGE else "access to unmapped address"
            raise MemoryFault(f"{what} at {a:#x}", address=a)
        slot = alloc.layout.slot_at(a - alloc.base)
        key = (alloc.base, slot)
        if key not in seen:
            seen.add(key)
            result.append((alloc, slot))
    return result
