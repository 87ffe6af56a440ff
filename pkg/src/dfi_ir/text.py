"""
稳定的逐行 IR 文本 (``--emit-ir``), 同时作为内容哈希的输入
"""

from typing import List

from dfi_ir import instructions as ir


def _where(ins: ir.Instr) -> str:
    return f" @{ins.pos.line}:{ins.pos.column}" if ins.pos else ""


def format_instr(ins: ir.Instr) -> str:
    if isinstance(ins, ir.Label):
        return f"{ins.name}:"
    if isinstance(ins, ir.Const):
        text = f"{ins.dest} = const {ins.value}"
    elif isinstance(ins, ir.AddrOf):
        text = f"{ins.dest} = addr a{ins.alloc}"
    elif isinstance(ins, ir.FieldAddr):
        text = f"{ins.dest} = field {ins.base} +{ins.offset} slot+{ins.slot_delta} .{ins.path}"
    elif isinstance(ins, ir.IndexAddr):
        text = f"{ins.dest} = index {ins.base}[{ins.index}] x{ins.elem_size}"
    elif isinstance(ins, ir.Load):
        text = f"u{ins.use}: {ins.dest} = load {ins.ctype} {ins.addr}  ; {ins.target}"
    elif isinstance(ins, ir.Store):
        text = f"d{ins.def_}: store {ins.ctype} {ins.value} -> {ins.addr}  ; {ins.target}"
    elif isinstance(ins, ir.Alloc):
        dest = f"{ins.dest} = " if ins.dest else ""
        count = f" x {ins.count}" if ins.count else ""
        text = f"{dest}alloc a{ins.alloc} {ins.kind.value} {ins.ctype}{count}  ; {ins.name}"
    elif isinstance(ins, ir.Free):
        text = f"free {ins.addr}"
    elif isinstance(ins, ir.BinOp):
        text = f"{ins.dest} = {ins.left} {ins.op} {ins.right}"
    elif isinstance(ins, ir.Neg):
        text = f"{ins.dest} = neg {ins.operand}"
    elif isinstance(ins, ir.Call):
        dest = f"{ins.dest} = " if ins.dest else ""
        text = f"{dest}call {ins.func}({', '.join(ins.args)})"
    elif isinstance(ins, ir.Ret):
        text = f"ret {ins.value}" if ins.value else "ret"
    elif isinstance(ins, ir.Branch):
        text = f"br {ins.cond} {ins.if_true} {ins.if_false}"
    elif isinstance(ins, ir.Jump):
        text = f"jmp {ins.label}"
    elif isinstance(ins, ir.Print):
        text = f"print {ins.value}"
    else:
        raise ValueError(f"unknown instruction {type(ins).__name__}")
    return "  " + text + _where(ins)


def format_function(func: ir.IRFunction) -> str:
    params = ", ".join(f"{t} {r}" for r, t in zip(func.params, func.param_types))
    lines: List[str] = [f"func {func.name}({params}) -> {func.return_type} {{"]
    lines.extend(format_instr(ins) for ins in func.instructions)
    lines.append("}")
    return "\n".join(lines)


def format_ir(prog: ir.IRProgram) -> str:
    return "\n\n".join(format_function(f) for f in prog.functions) + "\n"
