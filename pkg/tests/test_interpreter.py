import pytest

from conftest import build, run, shared_programs
from dfi_runtime.interpreter import RuntimeConfig, interpret
from dfi_runtime.report import ExecutionReport, Outcome, RunMode
from dfi_runtime.shadow import INITIAL, RELEASED
from fsdfi_errors import ConfigError, TableMismatch
from harness.compare import compare_modes
from harness.pipeline import run_mode
from minic.evaluator import evaluate
from vfa.analysis import analyze

UNINITIALIZED = """
int x;
void main() {
  print(x);
}
"""

SPIN = """
int x;
void main() {
  while (1 == 1) {
    x = x + 1;
  }
}
"""


def test_flagship_attack_is_caught_only_with_fields(flagship_source):
    protected = run(flagship_source, RunMode.PROTECTED, {"bound": 5})
    assert protected.outcome is Outcome.VIOLATION
    assert protected.exit_code == 10
    assert protected.transcript == []
    assert protected.violation.slot_path == "k"
    assert protected.diagnostic == "read of s.k at L15 saw write from s.a[*] at L12; legal writers: L9, <initial>"

    for mode in (RunMode.FIELD_INSENSITIVE, RunMode.BASELINE):
        report = run(flagship_source, mode, {"bound": 5})
        assert report.outcome is Outcome.COMPLETED, mode
        assert report.transcript == [104]


def test_flagship_benign_input_completes_everywhere(flagship_source):
    for mode in (RunMode.BASELINE, RunMode.FIELD_INSENSITIVE, RunMode.PROTECTED):
        report = run(flagship_source, mode, {"bound": 4})
        assert report.outcome is Outcome.COMPLETED, mode
        assert report.transcript == [7]


def test_log_continue_records_and_keeps_going(flagship_source):
    report = run(flagship_source, RunMode.PROTECTED, {"bound": 5}, config=RuntimeConfig(log_continue=True))
    assert report.outcome is Outcome.VIOLATION
    assert report.transcript == [104]
    assert report.violations[0] == report.violation
    assert report.violation.observed_def not in (INITIAL, RELEASED)


def test_strict_init_flags_uninitialized_reads():
    assert run(UNINITIALIZED, RunMode.PROTECTED).transcript == [0]
    report = run(UNINITIALIZED, RunMode.STRICT_INIT, strict_init=True)
    assert report.outcome is Outcome.VIOLATION
    assert report.violation.observed_def == INITIAL
    assert report.diagnostic.startswith("uninitialized read of x at L4")


def test_use_after_free_names_the_release():
    text = """
struct Session { int user; int role; };
void main() {
  struct Session *s;
  s = malloc(sizeof(struct Session));
  s->role = 1;
  free(s);
  print(s->role);
}
"""
    report = run(text, RunMode.PROTECTED)
    assert report.outcome is Outcome.VIOLATION
    assert report.violation.observed_def == RELEASED
    assert "released memory of malloc@L5.role" in report.diagnostic
    assert "(freed at L7)" in report.diagnostic
    assert run(text, RunMode.BASELINE).transcript == [1]


def test_tables_must_match_the_program(flagship_source):
    ir = build(flagship_source).ir
    other = analyze(build(UNINITIALIZED).ir).tables
    with pytest.raises(TableMismatch):
        interpret(ir, other, RunMode.PROTECTED)
    with pytest.raises(TableMismatch):
        interpret(ir, None, RunMode.PROTECTED)


def test_tables_must_match_the_init_policy(flagship_source):
    ir = build(flagship_source).ir
    loose = analyze(ir).tables
    strict = analyze(ir, strict_init=True).tables
    with pytest.raises(TableMismatch):
        interpret(ir, loose, RunMode.STRICT_INIT)
    with pytest.raises(TableMismatch):
        interpret(ir, strict, RunMode.PROTECTED)
    assert interpret(ir, strict, RunMode.FIELD_INSENSITIVE, {"bound": 4}).mode is RunMode.FIELD_INSENSITIVE
    assert interpret(ir, None, RunMode.BASELINE, {"bound": 4}).outcome is Outcome.COMPLETED


def test_budget_exhaustion_is_a_resource_limit():
    report = run(SPIN, RunMode.PROTECTED, config=RuntimeConfig(budget=500))
    assert report.outcome is Outcome.RESOURCE_LIMIT
    assert report.exit_code == 12
    assert report.counters.instructions == 501
    assert "budget" in report.fault


def test_division_by_zero_is_a_memory_fault():
    report = run("int z; void main() { print(10 / z); }", RunMode.BASELINE)
    assert report.outcome is Outcome.MEMORY_FAULT
    assert report.exit_code == 11
    assert "division by zero" in report.fault


def test_null_dereference_is_a_memory_fault():
    text = "struct P { int x; }; struct P *p; void main() { print(p->x); }"
    report = run(text, RunMode.PROTECTED)
    assert report.outcome is Outcome.MEMORY_FAULT
    assert "null pointer" in report.fault


def test_double_free_is_a_memory_fault():
    text = "struct P { int x; }; void main() { struct P *p; p = malloc(sizeof(struct P)); free(p); free(p); }"
    report = run(text, RunMode.BASELINE)
    assert report.outcome is Outcome.MEMORY_FAULT
    assert "double free" in report.fault


def test_failed_malloc_returns_null():
    text = "int *p; void main() { p = malloc(sizeof(int) * 5000); print(p == 0); }"
    assert run(text, RunMode.PROTECTED).transcript == [1]


def test_arithmetic_wraps_to_32_bits():
    text = "int x; void main() { x = 2147483647; print(x + 1); print(-7 / 2); }"
    assert run(text, RunMode.BASELINE).transcript == [-2147483648, -3]


def test_unknown_or_aggregate_inputs_are_rejected(flagship_source):
    with pytest.raises(ConfigError):
        run(flagship_source, RunMode.BASELINE, {"nosuch": 1})
    with pytest.raises(ConfigError):
        run(flagship_source, RunMode.BASELINE, {"s": 1})


def test_counters(flagship_source):
    baseline = run(flagship_source, RunMode.BASELINE, {"bound": 4})
    protected = run(flagship_source, RunMode.PROTECTED, {"bound": 4})
    b, p = baseline.counters, protected.counters
    assert b.instructions == p.instructions > 0
    assert b.loads_checked == 0 and b.stores_recorded == 0
    assert b.metadata_bytes == 0
    assert p.loads_checked == p.loads_executed
    assert p.stores_recorded == p.stores_executed
    assert 0 < p.metadata_bytes < p.per_byte_shadow_bytes
    assert p.program_bytes == b.program_bytes


def test_report_dict_round_trip(flagship_source):
    report = run(flagship_source, RunMode.PROTECTED, {"bound": 5})
    again = ExecutionReport.from_dict(report.to_dict())
    assert again.to_json() == report.to_json()


def test_baseline_agrees_with_reference_evaluator():
    programs = shared_programs()
    assert len({text for _, text, _, _ in programs}) >= 20
    for name, text, inputs, expected in programs:
        loaded = build(text, name)
        reference = evaluate(loaded.typed, inputs)
        report = interpret(loaded.ir, None, RunMode.BASELINE, inputs)
        assert report.outcome is Outcome.COMPLETED, name
        assert report.transcript == reference.transcript, name
        if expected is not None:
            assert report.transcript == expected, name


def test_shared_programs_run_clean_when_protected():
    for name, text, inputs, expected in shared_programs():
        report = run(text, RunMode.PROTECTED, inputs)
        assert report.outcome is Outcome.COMPLETED, (name, report.diagnostic)
        if expected is not None:
            assert report.transcript == expected, name


def test_run_mode_combines_strict_init_with_granularity(flagship_source):
    ir = build(flagship_source).ir
    assert run_mode(ir, RunMode.PROTECTED, {"bound": 4}, strict_init=True).mode is RunMode.STRICT_INIT
    relaxed = run_mode(ir, RunMode.FIELD_INSENSITIVE, {"bound": 4})
    strict = run_mode(ir, RunMode.FIELD_INSENSITIVE, {"bound": 4}, strict_init=True)
    assert relaxed.outcome is Outcome.COMPLETED
    assert strict.mode is RunMode.FIELD_INSENSITIVE
    assert strict.outcome is Outcome.VIOLATION
    assert strict.diagnostic.startswith("uninitialized read of bound")
    with pytest.raises(ConfigError):
        run_mode(ir, RunMode.BASELINE, {"bound": 4}, strict_init=True)


def test_compare_modes_reports_precision_gain(flagship_source):
    ir = build(flagship_source).ir
    attack = compare_modes(ir, {"bound": 5})
    assert attack.outcomes == (Outcome.COMPLETED, Outcome.COMPLETED, Outcome.VIOLATION)
    assert attack.precision_gain
    assert attack.to_dict()["outcomes"] == {
        "baseline": "Completed",
        "field-insensitive": "Completed",
        "protected": "Violation",
    }
    benign = compare_modes(ir, {"bound": 4})
    assert not benign.precision_gain
    assert benign.outcome(RunMode.PROTECTED) is Outcome.COMPLETED
