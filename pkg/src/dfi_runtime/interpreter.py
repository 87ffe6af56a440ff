"""
DFI 解释器

在 MemoryImage 上执行 IRProgram。除 baseline 外的模式中, 每条 Store 把 def id 记入
它覆盖的影子槽, 每条 Load 检查所读各槽的最后写者是否在该读站点的合法集合内。
baseline 模式保持相同的分配行为, 但不记录也不检查。
"""

from dataclasses import dataclass, field, replace
from typing import Dict, List, Mapping, Optional

from config import config as cfg
from config.logging_config import setup_logger
from dfi_ir import instructions as ir
from dfi_ir.sites import SiteCatalog, enumerate_sites, heap_layout_type
from dfi_runtime.diagnostics import diagnose
from dfi_runtime.memory import MemoryImage, allocate, deallocate, init_memory, resolve_slots
from dfi_runtime.report import Counters, ExecutionReport, Outcome, RunMode
from dfi_runtime.shadow import INITIAL, METADATA_ENTRY_BYTES, Violation, check_use, record_def
from fsdfi_errors import AllocFailure, ConfigError, FreeError, MemoryFault, ResourceLimit, TableMismatch
from minic.layout import TypeLayout
from minic.types import (
    CType,
    StructType,
    c_divide,
    decode_scalar,
    encode_scalar,
    narrow,
    scalar_size,
    wrap32,
)
from vfa.analysis import AnalysisTables
from vfa.compression import CompressedTable

logger = setup_logger()


@dataclass(frozen=True)
class RuntimeConfig:
    budget: int = cfg.FSDFI_BUDGET
    arena_size: int = cfg.FSDFI_ARENA_SIZE
    min_class: int = cfg.FSDFI_MIN_CLASS
    max_class: int = cfg.FSDFI_MAX_CLASS
    log_continue: bool = False


@dataclass
class _Frame:
    func: ir.IRFunction
    regs: Dict[str, int] = field(default_factory=dict)
    allocs: Dict[int, int] = field(default_factory=dict)  # stack alloc site -> base
    ret_dest: Optional[str] = None
    pc: int = 0


@dataclass(frozen=True)
class TraceEvent:
    """
    执行轨迹中的一个内存事件

    Attributes:
        kind: "alloc" (chunk 清零并重置影子), "store" 或 "input" (环境写入, 不带定义)
        address: 起始地址
        size: 字节数 (alloc 为整个 chunk)
        def_id: store 的定义编号, 其余为 INITIAL
    """

    kind: str
    address: int
    size: int
    def_id: int = INITIAL


class _Halt(Exception):
    pass


def _arith(op: str, left: int, right: int) -> int:
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
    if op == "<":
        return int(left < right)
    if op == "<=":
        return int(left <= right)
    if op == ">":
        return int(left > right)
    if op == ">=":
        return int(left >= right)
    if op == "==":
        return int(left == right)
    if op == "!=":
        return int(left != right)
    raise MemoryFault(f"unknown operator {op}")


class Interpreter:
    def __init__(
        self,
        program: ir.IRProgram,
        tables: Optional[AnalysisTables],
        mode: RunMode,
        config: RuntimeConfig = RuntimeConfig(),
        catalog: Optional[SiteCatalog] = None,
        trace: bool = False,
    ):
        self.program = program
        self.mode = mode
        self.config = config
        self.catalog = catalog or enumerate_sites(program)
        self.table = self._select_table(tables)
        self.memory: MemoryImage = init_memory(config.arena_size, config.min_class, config.max_class)
        self.global_allocs: Dict[int, int] = {}
        self.counters = Counters()
        self.report = ExecutionReport(program.path, program.content_hash, mode, counters=self.counters)
        self.trace: Optional[List[TraceEvent]] = [] if trace else None

    def _select_table(self, tables: Optional[AnalysisTables]) -> Optional[CompressedTable]:
        if tables is not None and tables.program_hash != self.program.content_hash:
            raise TableMismatch(
                f"tables were computed for program {tables.program_hash[:12]}, "
                f"not {self.program.content_hash[:12]}"
            )
        if not self.mode.checks:
            return None
        if tables is None:
            raise TableMismatch(f"mode {self.mode.value} needs analysis tables")
        wants_strict = self.mode is RunMode.STRICT_INIT
        if wants_strict != tables.strict_init and self.mode is not RunMode.FIELD_INSENSITIVE:
            raise TableMismatch(
                f"mode {self.mode.value} needs tables computed with strict_init={wants_strict}"
            )
        return tables.field_sensitive if self.mode.field_sensitive else tables.field_insensitive

    # -- helpers -----------------------------------------------------------

    def _layout(self, ctype: CType):
        return self.program.layouts.layout(ctype)

    def _allocate(self, layout: TypeLayout, site: int) -> int:
        base = allocate(self.memory, layout, site)
        if self.trace is not None:
            self.trace.append(TraceEvent("alloc", base, self.memory.chunks[base].chunk_size))
        return base

    def _allocate_fixed(self, ins: ir.Alloc) -> int:
        try:
            return self._allocate(self._layout(ins.ctype), ins.alloc)
        except AllocFailure as e:
            raise MemoryFault(f"cannot allocate {ins.kind.value} '{ins.name}': {e}") from None

    def _allocate_heap(self, ins: ir.Alloc, count: int) -> int:
        elem_size = self.program.layouts.size_of(ins.ctype)
        if count <= 0 or elem_size * count > self.memory.max_class:
            return 0
        try:
            return self._allocate(self._layout(heap_layout_type(ins.ctype, count)), ins.alloc)
        except AllocFailure:
            return 0

    def _violation(self, v: Violation, address: int, ins: ir.Load) -> None:
        def_site = self.catalog.def_sites.get(v.observed_def)
        v = replace(
            v,
            address=address,
            use_position=ins.pos,
            def_position=def_site.pos if def_site else None,
        )
        self.report.violations.append(v)
        if self.report.violation is None:
            self.report.violation = v
            self.report.diagnostic = diagnose(v, self.catalog).message
            logger.warning(f"DFI violation in {self.program.path}: {self.report.diagnostic}")
        if not self.config.log_continue:
            raise _Halt()

    def _apply_inputs(self, inputs: Mapping[str, int]) -> None:
        sites = {
            s.name: s for s in self.catalog.alloc_sites.values() if s.kind is ir.AllocKind.GLOBAL
        }
        for name, value in sorted(inputs.items()):
            site = sites.get(name)
            if site is None:
                raise ConfigError(f"input '{name}' is not a global variable")
            if not site.ctype.is_scalar():
                raise ConfigError(f"input '{name}' has non-scalar type {site.ctype}")
            base = self.global_allocs[site.id]
            size = scalar_size(site.ctype)
            self.memory.write(base, encode_scalar(value, site.ctype))
            # environment-provided bytes carry no definition
            self.memory.shadow.reset(resolve_slots(self.memory, base, size))
            if self.trace is not None:
                self.trace.append(TraceEvent("input", base, size))

    # -- execution ---------------------------------------------------------

    def _invoke(self, func: ir.IRFunction, args: List[int]) -> Optional[int]:
        frames = [self._new_frame(func, args, None)]
        result = None
        mem = self.memory
        counters = self.counters
        budget = self.config.budget
        checking = self.table is not None
        table = self.table
        trace = self.trace

        while frames:
            frame = frames[-1]
            ins = frame.func.instructions[frame.pc]
            frame.pc += 1
            counters.instructions += 1
            if counters.instructions > budget:
                raise ResourceLimit(f"instruction budget of {budget} exhausted")
            regs = frame.regs

            if isinstance(ins, ir.Load):
                address = regs[ins.addr]
                size = scalar_size(ins.ctype)
                slots = resolve_slots(mem, address, size)
                counters.loads_executed += 1
                if checking:
                    counters.loads_checked += 1
                    v = check_use(mem.shadow, slots, ins.use, table)
                    if v is not None:
                        self._violation(v, address, ins)
                regs[ins.dest] = decode_scalar(mem.read(address, size), ins.ctype)
            elif isinstance(ins, ir.Store):
                address = regs[ins.addr]
                slots = resolve_slots(mem, address, scalar_size(ins.ctype))
                mem.write(address, encode_scalar(regs[ins.value], ins.ctype))
                if trace is not None:
                    trace.append(TraceEvent("store", address, scalar_size(ins.ctype), ins.def_))
                counters.stores_executed += 1
                if checking:
                    record_def(mem.shadow, slots, ins.def_)
                    counters.stores_recorded += 1
            elif isinstance(ins, ir.Const):
                regs[ins.dest] = ins.value
            elif isinstance(ins, ir.AddrOf):
                base = frame.allocs.get(ins.alloc)
                regs[ins.dest] = base if base is not None else self.global_allocs[ins.alloc]
            elif isinstance(ins, ir.FieldAddr):
                regs[ins.dest] = regs[ins.base] + ins.offset
            elif isinstance(ins, ir.IndexAddr):
                regs[ins.dest] = regs[ins.base] + regs[ins.index] * ins.elem_size
            elif isinstance(ins, ir.BinOp):
                regs[ins.dest] = _arith(ins.op, regs[ins.left], regs[ins.right])
            elif isinstance(ins, ir.Neg):
                regs[ins.dest] = wrap32(-regs[ins.operand])
            elif isinstance(ins, ir.Branch):
                target = ins.if_true if regs[ins.cond] else ins.if_false
                frame.pc = frame.func.labels[target]
            elif isinstance(ins, ir.Jump):
                frame.pc = frame.func.labels[ins.label]
            elif isinstance(ins, ir.Label):
                pass
            elif isinstance(ins, ir.Print):
                self.report.transcript.append(regs[ins.value])
            elif isinstance(ins, ir.Alloc):
                if ins.kind is ir.AllocKind.HEAP:
                    count = regs[ins.count] if ins.count is not None else 1
                    regs[ins.dest] = self._allocate_heap(ins, count)
                elif ins.kind is ir.AllocKind.GLOBAL:
                    self.global_allocs[ins.alloc] = self._allocate_fixed(ins)
                else:
                    frame.allocs[ins.alloc] = self._allocate_fixed(ins)
            elif isinstance(ins, ir.Free):
                address = regs[ins.addr]
                if address != 0:
                    deallocate(mem, address, ins.pos)
            elif isinstance(ins, ir.Call):
                callee = self.program.function(ins.func)
                frames.append(self._new_frame(callee, [regs[a] for a in ins.args], ins.dest))
            elif isinstance(ins, ir.Ret):
                value = regs[ins.value] if ins.value is not None else None
                if value is not None:
                    value = narrow(value, frame.func.return_type)
                for base in frame.allocs.values():
                    deallocate(mem, base, ins.pos)
                frames.pop()
                if frames:
                    if frame.ret_dest is not None:
                        frames[-1].regs[frame.ret_dest] = value if value is not None else 0
                else:
                    result = value
            else:
                raise MemoryFault(f"cannot execute {type(ins).__name__}")
        return result

    def _new_frame(self, func: ir.IRFunction, args: List[int], ret_dest: Optional[str]) -> _Frame:
        frame = _Frame(func, ret_dest=ret_dest)
        for reg, ptype, value in zip(func.params, func.param_types, args):
            frame.regs[reg] = value if isinstance(ptype, StructType) else narrow(value, ptype)
        return frame

    def run(self, inputs: Optional[Mapping[str, int]] = None) -> ExecutionReport:
        inputs = dict(inputs or {})
        self.report.inputs = inputs
        try:
            self._invoke(self.program.function(ir.GLOBALS_FUNCTION), [])
            self._apply_inputs(inputs)
            self._invoke(self.program.function(ir.ENTRY_FUNCTION), [])
            self.report.outcome = Outcome.VIOLATION if self.report.violations else Outcome.COMPLETED
        except _Halt:
            self.report.outcome = Outcome.VIOLATION
        except (MemoryFault, FreeError) as e:
            self.report.outcome = Outcome.MEMORY_FAULT
            self.report.fault = str(e)
        except ResourceLimit as e:
            self.report.outcome = Outcome.RESOURCE_LIMIT
            self.report.fault = str(e)
        self._finish_counters()
        logger.info(
            f"Ran {self.program.path} [{self.mode.value}]: {self.report.outcome.value} after "
            f"{self.counters.instructions} instructions"
        )
        return self.report

    def _finish_counters(self) -> None:
        c = self.counters
        c.program_bytes = self.memory.peak_bytes
        c.per_byte_shadow_bytes = self.memory.peak_bytes * METADATA_ENTRY_BYTES
        if self.mode.checks:
            c.live_metadata_slots = self.memory.live_slots
            c.peak_live_metadata_slots = self.memory.peak_slots
            c.metadata_bytes = self.memory.peak_slots * METADATA_ENTRY_BYTES


def interpret(
    prog: ir.IRProgram,
    tables: Optional[AnalysisTables],
    mode: RunMode,
    inputs: Optional[Mapping[str, int]] = None,
    config: Optional[RuntimeConfig] = None,
) -> ExecutionReport:
    """
    在 ``mode`` 下执行 ``prog``

    违规、内存错误与预算耗尽都以执行结果 (Outcome) 报告, 不抛出异常

    Args:
        prog: 已降级的程序
        tables: 分析表 (baseline 可为 None)
        mode: 运行模式
        inputs: 全局变量初值
        config: 运行时配置

    Returns:
        ExecutionReport: 执行报告

    Raises:
        TableMismatch: 缺少分析表, 分析表属于其他程序, 或初始化策略不符
        ConfigError: arena 配置或输入不合法
    """
    return Interpreter(prog, tables, mode, config or RuntimeConfig()).run(inputs)
