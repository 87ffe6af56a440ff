import json
import os

import pytest

from conftest import CORPUS_DIR, build, corpus_source
from config import config as cfg
from fsdfi_errors import TableMismatch
from vfa.analysis import analyze, check_oracles, load_tables, write_tables
from vfa.legal_defs import INITIAL_DEF


def _corpus_programs():
    for name in sorted(os.listdir(CORPUS_DIR)):
        if name.endswith(".c"):
            yield name, build(corpus_source(name), name).ir


def test_field_insensitive_sets_are_supersets():
    for name, ir in _corpus_programs():
        result = analyze(ir)
        for use, (fs, fi) in enumerate(zip(result.legal.sets, result.legal_field_insensitive.sets)):
            assert set(fs) <= set(fi), f"{name} u{use}"


def test_every_use_admits_initial_unless_strict():
    for name, ir in _corpus_programs():
        loose = analyze(ir)
        strict = analyze(ir, strict_init=True)
        for use, members in enumerate(loose.legal.sets):
            assert members[0] == INITIAL_DEF, f"{name} u{use}"
        assert strict.legal.sets == tuple(tuple(d for d in s if d != INITIAL_DEF) for s in loose.legal.sets)
        assert strict.tables.strict_init


def test_oracles_agree_on_the_corpus():
    for name, ir in _corpus_programs():
        assert check_oracles(analyze(ir)) == [], name


def test_flagship_overflow_store_is_illegal_only_with_fields(flagship_source):
    result = analyze(build(flagship_source).ir)
    catalog = result.catalog
    array_stores = {d for d, site in catalog.def_sites.items() if site.target.endswith("a[*]")}
    k_uses = [u for u, site in catalog.use_sites.items() if site.target.endswith(".k")]
    assert array_stores and k_uses
    for use in k_uses:
        assert not array_stores & set(result.legal.sets[use])
        assert array_stores <= set(result.legal_field_insensitive.sets[use])


def test_field_insensitive_tables_are_larger():
    for name, ir in _corpus_programs():
        stats = analyze(ir).stats()
        assert stats["legal_total_size"] <= stats["legal_total_size_field_insensitive"], name


def test_tables_file_round_trip(tmp_path, flagship_source):
    result = analyze(build(flagship_source).ir)
    path = str(tmp_path / "tables.json")
    write_tables(result, path)
    assert load_tables(path) == result.tables
    with open(path, "r", encoding="utf-8") as f:
        data = json.load(f)
    assert data["schema_version"] == cfg.TABLE_SCHEMA_VERSION
    assert data["program"]["hash"] == result.program.content_hash


def test_tables_with_other_schema_are_rejected(flagship_source):
    data = analyze(build(flagship_source).ir).to_dict()
    data["schema_version"] = "0"
    with pytest.raises(TableMismatch):
        load_tables(data)


def test_malformed_tables_are_rejected(flagship_source):
    data = analyze(build(flagship_source).ir).to_dict()
    del data["compressed"]
    with pytest.raises(TableMismatch):
        load_tables(data)


def test_analysis_json_is_deterministic(flagship_source):
    first = analyze(build(flagship_source, "flag.c").ir).to_json()
    second = analyze(build(flagship_source, "flag.c").ir).to_json()
    assert first == second
