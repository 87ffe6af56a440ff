import dataclasses
import os

import pytest

from conftest import CORPUS_DIR, build, corpus_source
from dfi_ir import instructions as ops
from dfi_ir.sites import enumerate_sites
from dfi_ir.text import format_ir
from dfi_ir.validate import validate_ir
from fsdfi_errors import IRError
from minic.types import INT

SMALL = """
struct S { int a[4]; int k; };
struct S s;
void main() {
  s.a[1] = 5;
  print(s.k);
}
"""


def _replace_in(prog, name, index, **changes):
    func = prog.function(name)
    code = list(func.instructions)
    code[index] = dataclasses.replace(code[index], **changes)
    new_func = dataclasses.replace(func, instructions=tuple(code))
    functions = tuple(new_func if f.name == name else f for f in prog.functions)
    return dataclasses.replace(prog, functions=functions)


def _index_of(func, kind, nth=0):
    found = [i for i, ins in enumerate(func.instructions) if isinstance(ins, kind)]
    return found[nth]


def test_globals_function_comes_first():
    ir = build(SMALL).ir
    assert [f.name for f in ir.functions] == [ops.GLOBALS_FUNCTION, "main"]
    first = ir.functions[0].instructions[0]
    assert isinstance(first, ops.Alloc)
    assert first.kind is ops.AllocKind.GLOBAL
    assert first.name == "s"


def test_array_field_store_lowers_to_address_chain():
    main = build(SMALL).ir.function("main")
    kinds = [type(ins) for ins in main.instructions]
    assert kinds == [
        ops.Const, ops.AddrOf, ops.FieldAddr, ops.Const, ops.IndexAddr, ops.Store,
        ops.AddrOf, ops.FieldAddr, ops.Load, ops.Print, ops.Ret,
    ]
    store = main.instructions[5]
    assert store.def_ == 1
    assert store.target == "s.a[*]"
    field_k = main.instructions[7]
    assert (field_k.offset, field_k.slot_delta) == (16, 1)
    load = main.instructions[8]
    assert load.use == 0
    assert load.target == "s.k"


def test_site_ids_are_dense_on_every_corpus_program():
    for name in sorted(os.listdir(CORPUS_DIR)):
        if not name.endswith(".c"):
            continue
        ir = build(corpus_source(name), name).ir
        catalog = enumerate_sites(ir)
        assert sorted(catalog.def_sites) == list(range(1, len(catalog.def_sites) + 1))
        assert sorted(catalog.use_sites) == list(range(len(catalog.use_sites)))
        assert sorted(catalog.alloc_sites) == list(range(len(catalog.alloc_sites)))
        validate_ir(ir)


def test_enumerate_sites_describes_allocations():
    text = """
struct P { int x; int y; };
void main() {
  struct P *p;
  int n;
  p = malloc(sizeof(struct P));
  p->y = 3;
  n = p->y;
  free(p);
}
"""
    catalog = enumerate_sites(build(text).ir)
    kinds = {site.name: site.kind for site in catalog.alloc_sites.values()}
    assert kinds["p"] is ops.AllocKind.STACK
    assert kinds["n"] is ops.AllocKind.STACK
    heap = [s for s in catalog.alloc_sites.values() if s.kind is ops.AllocKind.HEAP]
    assert len(heap) == 1
    assert heap[0].name == "malloc@L6"
    assert heap[0].slot_count == 2
    targets = sorted(site.target for site in catalog.def_sites.values())
    assert "p->y" in targets


def test_text_format_names_sites():
    text = format_ir(build(SMALL).ir)
    assert "func main() -> void {" in text
    assert "d1: store int" in text
    assert "u0: " in text
    assert "alloc a0 global struct S" in text
    assert text.endswith("}\n")


def test_content_hash_is_stable_and_sensitive():
    first = build(SMALL).ir.content_hash
    assert first == build(SMALL).ir.content_hash
    assert len(first) == 64
    changed = SMALL.replace("= 5", "= 6")
    assert build(changed).ir.content_hash != first


def test_validate_rejects_duplicate_def_id():
    text = "int x; int y; void main() { x = 1; y = 2; }"
    ir = build(text).ir
    main = ir.function("main")
    broken = _replace_in(ir, "main", _index_of(main, ops.Store, 1), def_=1)
    with pytest.raises(IRError) as err:
        validate_ir(broken)
    assert "duplicate def id" in str(err.value)


def test_validate_rejects_sparse_def_ids():
    ir = build("int x; void main() { x = 1; }").ir
    main = ir.function("main")
    broken = _replace_in(ir, "main", _index_of(main, ops.Store), def_=5)
    with pytest.raises(IRError) as err:
        validate_ir(broken)
    assert "not dense" in str(err.value)


def test_validate_rejects_non_pointer_address():
    ir = build("int x; int y; void main() { y = 7; x = y; }").ir
    main = ir.function("main")
    const_reg = main.instructions[_index_of(main, ops.Const)].dest
    assert main.reg_types[const_reg] == INT
    broken = _replace_in(ir, "main", _index_of(main, ops.Load), addr=const_reg)
    with pytest.raises(IRError) as err:
        validate_ir(broken)
    assert "non-pointer" in str(err.value)


def test_validate_rejects_unknown_branch_target():
    ir = build("int x; void main() { if (x != 0) { x = 1; } }").ir
    main = ir.function("main")
    broken = _replace_in(ir, "main", _index_of(main, ops.Branch), if_true="nowhere")
    with pytest.raises(IRError) as err:
        validate_ir(broken)
    assert "unknown label" in str(err.value)


def test_validate_requires_main():
    ir = build("void main() { }").ir
    broken = dataclasses.replace(ir, functions=ir.functions[:1])
    with pytest.raises(IRError) as err:
        validate_ir(broken)
    assert "no main" in str(err.value)
