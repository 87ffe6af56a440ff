import os

import pytest
from pycparser import c_parser

from conftest import CORPUS_DIR, corpus_source
from fsdfi_errors import LayoutError, MiniCTypeError, ParseError
from minic import ast_nodes as A
from minic.parser import _translate_error, parse_text
from minic.printer import format_program
from minic.typechecker import typecheck
from minic.types import CHAR, INT, ArrayType, PointerType, StructType


def _check(text: str):
    return typecheck(parse_text(text, "<test>"))


def test_parse_minimal_program():
    prog = parse_text("int x; void main(){ x = 1; }")
    assert len(prog.globals) == 1
    assert prog.globals[0].name == "x"
    main = prog.functions[0]
    assert main.name == "main"
    assert len(main.body.items) == 1
    assert isinstance(main.body.items[0], A.Assign)


def test_parse_struct_declaration():
    prog = parse_text("struct S { int a[4]; int k; }; void main(){ }")
    (decl,) = prog.structs
    assert [f.name for f in decl.fields] == ["a", "k"]
    assert decl.fields[0].ctype == ArrayType(INT, 4)


def test_parse_error_has_position():
    with pytest.raises(ParseError) as err:
        parse_text("int x = ;", "<test>")
    assert err.value.line == 1
    assert str(err.value).startswith("<test>:1")


def test_parse_error_without_position_prefix_uses_last_token(monkeypatch):
    original = c_parser.CParser.parse

    def parse_without_prefix(self, text, filename="", debug=False):
        try:
            return original(self, text, filename, debug)
        except c_parser.ParseError as e:
            raise c_parser.ParseError(str(e).split(": ", 1)[-1]) from None

    monkeypatch.setattr(c_parser.CParser, "parse", parse_without_prefix)
    with pytest.raises(ParseError) as err:
        parse_text("int x = ;", "<test>")
    assert (err.value.line, err.value.column) == (1, 9)


def test_translate_error_fallback_position():
    err = _translate_error("before: ;", "<test>", (3, 7))
    assert (err.line, err.column) == (3, 7)
    assert "before: ;" in str(err)
    located = _translate_error("<test>:2:5: before: x", "<test>", (3, 7))
    assert (located.line, located.column) == (2, 5)
    assert _translate_error("before: ;", "<test>").line is None


def test_positions_attached_to_nodes():
    prog = parse_text("int x;\nvoid main() {\n  x = 1;\n}\n")
    stmt = prog.functions[0].body.items[0]
    assert stmt.pos.line == 3
    assert stmt.target.pos.line == 3


@pytest.mark.parametrize(
    "text",
    [
        "void main() { int i; for (i = 0; i < 2; i = i + 1) { } }",
        "union U { int a; }; void main() { }",
        "void main() { int a; a = (char) 1; }",
        "void main() { int a; a = 1 && 2; }",
        "void main() { int a; a = 5 % 2; }",
        "void main() { int a; a += 1; }",
        "typedef int myint; void main() { }",
    ],
)
def test_constructs_outside_minic_are_rejected(text):
    with pytest.raises(ParseError):
        parse_text(text)


def test_comments_keep_positions():
    prog = parse_text("// header\nint x; // trailing\nvoid main() { x = 2; }\n")
    assert prog.globals[0].pos.line == 2


def test_print_then_reparse_is_identical():
    for name in sorted(os.listdir(CORPUS_DIR)):
        if not name.endswith(".c"):
            continue
        original = parse_text(corpus_source(name), name)
        assert parse_text(format_program(original), name) == original


def test_typecheck_resolves_expression_types():
    typed = _check("struct P { int x; char c; }; struct P p; void main() { p.c = 'a'; p.x = p.c; }")
    assign = typed.function("main").body.items[1]
    assert assign.target.ctype == INT
    assert assign.value.ctype == CHAR
    assert assign.value.base.ctype == StructType("P")


def test_typecheck_accepts_null_pointer_constant():
    typed = _check("struct P { int x; }; struct P *q; void main() { q = 0; }")
    assert typed.globals[0].ctype == PointerType(StructType("P"))


def test_int_to_pointer_is_a_type_error():
    with pytest.raises(MiniCTypeError) as err:
        _check("int *p; void main() { p = 5; }")
    assert "incompatible types" in str(err.value)


def test_pointer_type_mismatch_is_a_type_error():
    with pytest.raises(MiniCTypeError):
        _check("int *p; char *q; void main() { p = q; }")


def test_address_of_non_lvalue_is_a_type_error():
    with pytest.raises(MiniCTypeError) as err:
        _check("int *p; void main() { p = &(1 + 2); }")
    assert "lvalue" in str(err.value)


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("void f() { } void g() { }", "no main"),
        ("void main() { y = 1; }", "undeclared"),
        ("struct S { int a; }; struct S s; void main() { s.b = 1; }", "no field"),
        ("int f(int a) { a = 2; return a; } void main() { }", "read-only"),
        ("void f(int a) { } void main() { f(1, 2); }", "expects 1"),
        ("void f() { } void main() { int x; x = f(); }", "used as a value"),
        ("int *p; void main() { free(1); }", "free expects a pointer"),
        ("struct S { int a; }; struct S s; struct S t; void main() { s = t; }", "whole"),
        ("int a[2]; int *p; void main() { p = &a; }", "whole array"),
        ("void main() { int x; int x; }", "already"),
    ],
)
def test_type_errors(text, fragment):
    with pytest.raises(MiniCTypeError) as err:
        _check(text)
    assert fragment in str(err.value)


def test_recursive_struct_by_value_is_a_layout_error():
    with pytest.raises(LayoutError):
        _check("struct R { int a; struct R next; }; void main() { }")


def test_recursive_struct_through_pointer_is_fine():
    typed = _check("struct L { int v; struct L *next; }; void main() { }")
    assert typed.layouts.size_of(StructType("L")) == 16
