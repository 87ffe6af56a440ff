import json
import os
import random
import shutil

import pytest

from conftest import CORPUS_DIR
from dfi_runtime.interpreter import interpret
from dfi_runtime.report import Outcome, RunMode
from fsdfi_errors import CorpusError
from harness.corpus import Category, load_corpus, parse_modes, run_corpus
from vfa.analysis import analyze

INTRA_OBJECT_CASES = {
    "intra-struct-array",
    "intra-struct-heap-table",
    "intra-struct-login",
    "wrong-pointer-config",
}


@pytest.fixture(scope="module")
def corpus_report():
    return run_corpus(CORPUS_DIR)


@pytest.fixture(scope="module")
def benign_setup():
    cases, programs = load_corpus(CORPUS_DIR)
    benign = [c for c in cases if not c.category.is_attack]
    analyses = {source: analyze(loaded.ir) for source, loaded in programs.items()}
    return benign, programs, analyses


def _copy_flagship(tmp_path):
    for name in ("intra_struct_array.c", "intra_struct_array.expect.json"):
        shutil.copy(os.path.join(CORPUS_DIR, name), tmp_path / name)
    with open(tmp_path / "intra_struct_array.expect.json", "r", encoding="utf-8") as f:
        return json.load(f)


def _write_expect(tmp_path, data):
    with open(tmp_path / "intra_struct_array.expect.json", "w", encoding="utf-8") as f:
        json.dump(data, f)


def test_every_expectation_holds(corpus_report):
    assert corpus_report.mismatches == []
    assert corpus_report.ok
    totals = corpus_report.totals()
    assert totals["cases"] == 26
    assert totals["attacks"] == 13
    assert totals["runs"] == 78


def test_detections_per_mode(corpus_report):
    detections = corpus_report.detections()
    assert detections["protected"] == 13
    assert detections["field-insensitive"] == 9
    assert detections["baseline"] == 0


def test_precision_delta_is_the_intra_object_cases(corpus_report):
    assert set(corpus_report.precision_delta()) == INTRA_OBJECT_CASES
    fi = set(corpus_report.detected_ids(RunMode.FIELD_INSENSITIVE))
    assert fi <= set(corpus_report.detected_ids(RunMode.PROTECTED))


def test_no_false_positives(corpus_report):
    assert corpus_report.false_positives() == []


def test_every_category_is_represented(corpus_report):
    seen = {r.case.category for r in corpus_report.results}
    assert seen == set(Category)


def test_overheads_come_from_benign_runs(corpus_report):
    metrics = corpus_report.overheads()
    assert len(metrics) == 13
    for m in metrics:
        assert m.runtime_proxy > 0
        assert 0 < m.memory_proxy < 4


def test_wrong_expectation_is_reported(tmp_path):
    data = _copy_flagship(tmp_path)
    data["cases"][0]["expected"]["protected"] = "Completed"
    _write_expect(tmp_path, data)
    report = run_corpus(str(tmp_path))
    assert not report.ok
    assert report.mismatches == ["intra-struct-array [protected]: expected Completed, got Violation"]


def test_empty_directory_is_rejected(tmp_path):
    with pytest.raises(CorpusError):
        load_corpus(str(tmp_path))


def test_attack_without_twin_is_rejected(tmp_path):
    data = _copy_flagship(tmp_path)
    data["cases"] = data["cases"][:1]
    _write_expect(tmp_path, data)
    with pytest.raises(CorpusError) as err:
        load_corpus(str(tmp_path))
    assert any("benign twin" in p for p in err.value.problems)


def test_orphan_expectation_file_is_rejected(tmp_path):
    _copy_flagship(tmp_path)
    (tmp_path / "ghost.expect.json").write_text('{"cases": []}', encoding="utf-8")
    with pytest.raises(CorpusError):
        load_corpus(str(tmp_path))


def test_unknown_category_is_rejected(tmp_path):
    data = _copy_flagship(tmp_path)
    data["cases"][0]["category"] = "stack-smash"
    _write_expect(tmp_path, data)
    with pytest.raises(CorpusError):
        load_corpus(str(tmp_path))


def test_parse_modes():
    assert parse_modes("protected, baseline,protected") == (RunMode.PROTECTED, RunMode.BASELINE)
    with pytest.raises(CorpusError):
        parse_modes("protected,bogus")
    with pytest.raises(CorpusError):
        parse_modes(" , ")


@pytest.mark.parametrize("seed", range(100))
def test_randomized_benign_inputs_never_violate(seed, benign_setup):
    benign, programs, analyses = benign_setup
    rng = random.Random(seed)
    case = benign[seed % len(benign)]
    inputs = {name: rng.randint(low, high) for name, (low, high) in sorted(case.safe_input_ranges.items())}
    loaded = programs[case.source]
    report = interpret(loaded.ir, analyses[case.source].tables, RunMode.PROTECTED, inputs)
    assert report.violations == [], (case.id, inputs)
    assert report.outcome is Outcome.COMPLETED
