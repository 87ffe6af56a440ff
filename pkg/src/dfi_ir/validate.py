"""
IRProgram 的结构检查
"""

from typing import Dict, List, Set

from config.logging_config import setup_logger
from dfi_ir import instructions as ir
from dfi_ir.text import format_instr
from fsdfi_errors import IRError

logger = setup_logger()


def _fail(func: ir.IRFunction, ins: ir.Instr, message: str) -> IRError:
    pos = ins.pos
    return IRError(
        f"{message} in {func.name}: {format_instr(ins).strip()}",
        line=pos.line if pos else None,
        column=pos.column if pos else None,
    )


def _check_dense(ids: List[int], start: int, kind: str) -> None:
    expected = list(range(start, start + len(ids)))
    if sorted(ids) != expected:
        raise IRError(f"{kind} ids are not dense from {start}: {sorted(ids)}")


def validate_ir(prog: ir.IRProgram) -> None:
    """
    检查站点编号, 寄存器单次赋值以及地址运算的类型

    Args:
        prog: 待检查的程序

    Raises:
        IRError: 指出被违反的约束及对应指令
    """
    def_ids: Dict[int, ir.Instr] = {}
    use_ids: Dict[int, ir.Instr] = {}
    alloc_ids: Dict[int, ir.Instr] = {}
    names = set()
    for func in prog.functions:
        if func.name in names:
            raise IRError(f"duplicate function {func.name}")
        names.add(func.name)
    if ir.ENTRY_FUNCTION not in names:
        raise IRError("program has no main function")

    for func in prog.functions:
        defined: Set[str] = set(func.params)
        labels: Set[str] = set()
        for ins in func.instructions:
            if isinstance(ins, ir.Label):
                if ins.name in labels:
                    raise _fail(func, ins, "duplicate label")
                labels.add(ins.name)
            for reg in ins.defined():
                if reg in defined:
                    raise _fail(func, ins, f"register {reg} assigned twice")
                defined.add(reg)
            if isinstance(ins, ir.Store):
                if ins.def_ in def_ids:
                    raise _fail(func, ins, f"duplicate def id {ins.def_}")
                def_ids[ins.def_] = ins
            elif isinstance(ins, ir.Load):
                if ins.use in use_ids:
                    raise _fail(func, ins, f"duplicate use id {ins.use}")
                use_ids[ins.use] = ins
            elif isinstance(ins, ir.Alloc):
                if ins.alloc in alloc_ids:
                    raise _fail(func, ins, f"duplicate alloc id {ins.alloc}")
                alloc_ids[ins.alloc] = ins

        for ins in func.instructions:
            for reg in ins.used():
                if reg not in defined:
                    raise _fail(func, ins, f"register {reg} is never assigned")
            address = None
            if isinstance(ins, (ir.Load, ir.Store)):
                address = ins.addr
            elif isinstance(ins, (ir.FieldAddr, ir.IndexAddr)):
                address = ins.base
            if address is not None:
                ctype = func.reg_types.get(address)
                if ctype is None or not ctype.is_pointer():
                    raise _fail(func, ins, f"address operand {address} has non-pointer type {ctype}")
            if isinstance(ins, ir.Branch):
                for target in (ins.if_true, ins.if_false):
                    if target not in labels:
                        raise _fail(func, ins, f"branch to unknown label {target}")
            elif isinstance(ins, ir.Jump) and ins.label not in labels:
                raise _fail(func, ins, f"jump to unknown label {ins.label}")
            elif isinstance(ins, ir.Call):
                if ins.func not in names or ins.func == ir.GLOBALS_FUNCTION:
                    raise _fail(func, ins, f"call to unknown function {ins.func}")
                if len(ins.args) != len(prog.function(ins.func).params):
                    raise _fail(func, ins, "call arity mismatch")
            elif isinstance(ins, ir.AddrOf) and ins.alloc not in alloc_ids:
                raise _fail(func, ins, f"address of unknown alloc site a{ins.alloc}")

    _check_dense(list(def_ids), 1, "def")
    _check_dense(list(use_ids), 0, "use")
    _check_dense(list(alloc_ids), 0, "alloc")
    logger.debug(f"Validated IR of {prog.path}")
