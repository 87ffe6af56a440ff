import filecmp
import os

from conftest import CORPUS_DIR
from fsdfi_workflow import main
from harness.corpus import run_corpus

FLAGSHIP = os.path.join(CORPUS_DIR, "intra_struct_array.c")


def test_analyze_output_is_byte_identical(tmp_path):
    first, second = str(tmp_path / "a.json"), str(tmp_path / "b.json")
    assert main(["analyze", FLAGSHIP, "--emit", first]) == 0
    assert main(["analyze", FLAGSHIP, "--emit", second]) == 0
    assert filecmp.cmp(first, second, shallow=False)


def test_run_report_is_byte_identical(tmp_path):
    first, second = str(tmp_path / "a.json"), str(tmp_path / "b.json")
    assert main(["run", FLAGSHIP, "--input", "bound=5", "--report", first]) == 10
    assert main(["run", FLAGSHIP, "--input", "bound=5", "--report", second]) == 10
    assert filecmp.cmp(first, second, shallow=False)


def test_corpus_report_ignores_scheduling():
    serial = run_corpus(CORPUS_DIR, max_concurrent_cases=1).to_json()
    parallel = run_corpus(CORPUS_DIR, max_concurrent_cases=8).to_json()
    assert serial == parallel
