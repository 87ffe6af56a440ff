from conftest import build
from dfi_ir.sites import enumerate_sites
from dfi_runtime.diagnostics import diagnose, legal_writers_summary
from dfi_runtime.shadow import INITIAL, RELEASED, Violation
from minic.ast_nodes import Pos

TEXT = """
struct Acct { int balance; int limit; };
struct Acct acct;
void main() {
  acct.balance = 10;
  acct.limit = 50;
  print(acct.limit);
}
"""


def _catalog():
    return enumerate_sites(build(TEXT).ir)


def _violation(observed, legal=(0, 2), released_at=None):
    return Violation(
        use_id=0,
        observed_def=observed,
        legal_set_id=0,
        legal_defs=legal,
        alloc_site=0,
        alloc_base=1 << 20,
        slot=1,
        slot_path="limit",
        released_at=released_at,
    )


def test_illegal_write_names_both_sites():
    d = diagnose(_violation(1), _catalog())
    assert d.kind == "illegal-write"
    assert d.message == "read of acct.limit at L7 saw write from acct.balance at L5; legal writers: L6, <initial>"
    assert (d.use_line, d.def_line) == (7, 5)
    assert d.field_path == "acct.limit"


def test_uninitialized_read():
    d = diagnose(_violation(INITIAL, legal=(2,)), _catalog())
    assert d.kind == "uninitialized"
    assert d.message == "uninitialized read of acct.limit at L7; legal writers: L6"


def test_released_read_mentions_the_free():
    d = diagnose(_violation(RELEASED, released_at=Pos(9, 3)), _catalog())
    assert d.kind == "released"
    assert "saw released memory of acct.limit (freed at L9)" in d.message
    assert d.def_line == 9


def test_legal_writers_summary_without_any_writer():
    assert legal_writers_summary(_violation(1, legal=()), _catalog()) == "none"
    assert legal_writers_summary(_violation(1, legal=(0,)), _catalog()) == "<initial>"


def test_diagnostic_dict():
    data = diagnose(_violation(1), _catalog()).to_dict()
    assert data["kind"] == "illegal-write"
    assert data["legal_writers"] == "L6, <initial>"
