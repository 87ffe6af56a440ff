import json
import os
import random

import pytest

from conftest import CORPUS_DIR, GOLDEN_LAYOUTS, build, corpus_source
from dfi_runtime.interpreter import Interpreter, RuntimeConfig
from dfi_runtime.report import RunMode
from fsdfi_errors import LayoutError
from harness.corpus import load_corpus
from minic import ast_nodes as A
from minic.layout import compute_layout, describe_path, flatten_fields, layouts_for_program
from minic.types import CHAR, INT, ArrayType, PointerType, StructType
from vfa.analysis import analyze


def _structs(*decls):
    return {d.name: d for d in decls}


def _struct(name, *fields):
    return A.StructDecl(name, tuple(A.FieldDecl(t, n) for t, n in fields))


def test_scalar_layouts():
    assert compute_layout(INT, {}).size == 4
    assert compute_layout(CHAR, {}).size == 1
    assert compute_layout(PointerType(INT), {}).size == 8


def test_array_collapses_to_one_slot():
    layout = compute_layout(StructType("S"), _structs(_struct("S", (ArrayType(INT, 4), "a"), (INT, "k"))))
    assert layout.size == 20
    assert layout.align == 4
    assert [s.to_list() for s in flatten_fields(layout)] == [[0, 0, 16, "a"], [1, 16, 4, "k"]]


def test_padding_goes_to_preceding_slot():
    layout = compute_layout(StructType("T"), _structs(_struct("T", (CHAR, "c"), (INT, "i"))))
    assert layout.size == 8
    assert [s.to_list() for s in layout.segments] == [[0, 0, 4, "c"], [1, 4, 4, "i"]]
    assert layout.slot_at(3) == 0


def test_trailing_padding_goes_to_last_slot():
    layout = compute_layout(StructType("U"), _structs(_struct("U", (INT, "i"), (CHAR, "c"))))
    assert layout.size == 8
    assert layout.segments[-1].to_list() == [1, 4, 4, "c"]


def test_nested_struct_is_flattened_to_leaf_slots():
    structs = _structs(
        _struct("In", (INT, "x"), (INT, "y")),
        _struct("Out", (CHAR, "tag"), (StructType("In"), "inner"), (INT, "z")),
    )
    layout = compute_layout(StructType("Out"), structs)
    assert layout.slot_paths == ("tag", "inner.x", "inner.y", "z")
    assert [s.offset for s in flatten_fields(layout)] == [0, 4, 8, 12]
    assert layout.size == 16


def test_slots_are_disjoint_and_cover_the_object():
    for name in sorted(os.listdir(CORPUS_DIR)):
        if not name.endswith(".c"):
            continue
        loaded = build(corpus_source(name), name)
        for layout_dict in layouts_for_program(loaded.typed.layouts).values():
            covered = []
            for _slot, offset, length, _path in layout_dict["slots"]:
                covered.extend(range(offset, offset + length))
            assert covered == list(range(layout_dict["size"]))


def test_recursive_by_value_struct_is_rejected():
    with pytest.raises(LayoutError):
        compute_layout(StructType("R"), _structs(_struct("R", (INT, "a"), (StructType("R"), "r"))))


def test_describe_path():
    assert describe_path("s", "a[*]") == "s.a[*]"
    assert describe_path("malloc@L5", "[*].x") == "malloc@L5[*].x"
    assert describe_path("x", "") == "x"


def test_corpus_layouts_match_golden_file():
    with open(GOLDEN_LAYOUTS, "r", encoding="utf-8") as f:
        golden = json.load(f)
    seen = {}
    for name in sorted(os.listdir(CORPUS_DIR)):
        if name.endswith(".c"):
            loaded = build(corpus_source(name), name)
            seen.update(layouts_for_program(loaded.typed.layouts))
    assert seen == golden


def test_layout_identical_across_modes():
    cases, programs = load_corpus(CORPUS_DIR)
    for case in cases:
        ir = programs[case.source].ir
        tables = analyze(ir).tables
        placements = {}
        for mode in (RunMode.BASELINE, RunMode.FIELD_INSENSITIVE, RunMode.PROTECTED):
            interp = Interpreter(ir, tables, mode, RuntimeConfig(log_continue=True))
            interp.run(case.inputs)
            placements[mode] = sorted(
                (a.base, a.site, a.chunk_size, json.dumps(a.layout.to_dict()))
                for a in interp.memory.chunks.values()
            )
        assert placements[RunMode.BASELINE] == placements[RunMode.PROTECTED], case.id
        assert placements[RunMode.BASELINE] == placements[RunMode.FIELD_INSENSITIVE], case.id


def _c_size_align(ctype, decls):
    """按 C 规则独立计算大小与对齐"""
    if ctype == CHAR:
        return 1, 1
    if ctype == INT:
        return 4, 4
    if isinstance(ctype, PointerType):
        return 8, 8
    if isinstance(ctype, ArrayType):
        size, align = _c_size_align(ctype.element, decls)
        return size * ctype.length, align
    offset, align = 0, 1
    for f in decls[ctype.name].fields:
        size, falign = _c_size_align(f.ctype, decls)
        offset = (offset + falign - 1) // falign * falign + size
        align = max(align, falign)
    return (offset + align - 1) // align * align, align


def _leaf_count(ctype, decls):
    if isinstance(ctype, StructType):
        return sum(_leaf_count(f.ctype, decls) for f in decls[ctype.name].fields)
    if isinstance(ctype, ArrayType) and isinstance(ctype.element, (StructType, ArrayType)):
        return _leaf_count(ctype.element, decls)
    return 1


def _random_structs(rng, count):
    decls = {}
    for i in range(count):
        name = f"R{i}"
        earlier = [StructType(n) for n in decls]
        fields = []
        for j in range(rng.randint(1, 5)):
            pick = rng.random()
            if pick < 0.45:
                ctype = rng.choice([CHAR, INT, PointerType(INT), PointerType(StructType(name))])
            elif pick < 0.75:
                ctype = ArrayType(rng.choice([CHAR, INT] + earlier), rng.randint(1, 4))
            elif earlier:
                ctype = rng.choice(earlier)
            else:
                ctype = CHAR
            fields.append((ctype, f"f{j}"))
        decls[name] = _struct(name, *fields)
    return decls


@pytest.mark.parametrize("seed", range(25))
def test_random_struct_slots_partition_the_object(seed):
    rng = random.Random(seed)
    decls = _random_structs(rng, rng.randint(1, 4))
    for name in decls:
        ctype = StructType(name)
        layout = compute_layout(ctype, decls)
        assert (layout.size, layout.align) == _c_size_align(ctype, decls)
        assert layout.slot_count == _leaf_count(ctype, decls)

        end = 0
        for seg in layout.segments:
            assert seg.offset == end and seg.length > 0
            end = seg.offset + seg.length
        assert end == layout.size
        assert {seg.slot for seg in layout.segments} == set(range(layout.slot_count))
        for seg in layout.segments:
            for offset in range(seg.offset, seg.offset + seg.length):
                assert layout.slot_at(offset) == seg.slot
        assert [s.slot for s in flatten_fields(layout)] == list(range(layout.slot_count))
