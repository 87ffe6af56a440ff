import os

from conftest import CORPUS_DIR, build, corpus_source
from vfa.analysis import analyze
from vfa.compression import CompressedTable, compress_sets
from vfa.legal_defs import LegalDefTable


def _table():
    return LegalDefTable(((0, 1), (0,), (0, 1), (0, 2), (0,)))


def test_set_ids_follow_first_occurrence():
    table = compress_sets(_table())
    assert table.use_to_set == (0, 1, 0, 2, 1)
    assert table.sets == ((0, 1), (0,), (0, 2))
    assert table.set_count == 3
    assert table.entry_count == 5 + 5


def test_membership():
    table = compress_sets(_table())
    assert table.contains(0, 1)
    assert table.contains(3, 2)
    assert not table.contains(3, 1)
    assert not table.contains(1, 5)
    assert table.legal_set(2) == (0, 1)


def test_decompress_restores_every_set():
    for name in sorted(os.listdir(CORPUS_DIR)):
        if not name.endswith(".c"):
            continue
        result = analyze(build(corpus_source(name), name).ir)
        assert result.tables.field_sensitive.decompress() == result.legal
        assert result.tables.field_insensitive.decompress() == result.legal_field_insensitive


def test_dict_form_keeps_flags():
    table = compress_sets(LegalDefTable(((1,), (1, 3)), strict_init=True, granularity="object"))
    again = CompressedTable.from_dict(table.to_dict())
    assert again == table
    assert again.strict_init
    assert again.granularity == "object"


def test_empty_program_has_no_sets():
    table = compress_sets(LegalDefTable(()))
    assert table.set_count == 0
    assert table.entry_count == 0
