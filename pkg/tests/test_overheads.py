import pytest

from conftest import CORPUS_DIR, run
from dfi_runtime.interpreter import Interpreter, RuntimeConfig, interpret
from dfi_runtime.report import Counters, ExecutionReport, Outcome, RunMode
from dfi_runtime.shadow import METADATA_ENTRY_BYTES
from fsdfi_errors import MetricsError
from harness.corpus import load_corpus
from harness.overheads import OverheadMetrics, aggregate_overheads, count_overheads
from vfa.analysis import analyze


def _report(mode, outcome=Outcome.COMPLETED, program_hash="h", inputs=None, **counters):
    return ExecutionReport(
        program_path="p.c",
        program_hash=program_hash,
        mode=mode,
        outcome=outcome,
        counters=Counters(**counters),
        inputs=dict(inputs or {}),
    )


def _metrics(n, checked, meta, program):
    return OverheadMetrics("p.c", n, checked, 0, 0, meta, program, program * 4)


def test_proxy_formulas():
    baseline = _report(RunMode.BASELINE, instructions=100)
    protected = _report(
        RunMode.PROTECTED, instructions=100, loads_checked=20, stores_recorded=10,
        metadata_bytes=16, program_bytes=64, per_byte_shadow_bytes=256,
    )
    m = count_overheads(baseline, protected)
    assert m.checked_instructions == 130
    assert m.runtime_proxy == pytest.approx(0.3)
    assert m.memory_proxy == pytest.approx(0.25)
    assert m.to_dict()["runtime_proxy"] == 0.3


@pytest.mark.parametrize(
    "baseline, protected",
    [
        (_report(RunMode.BASELINE, instructions=10), _report(RunMode.PROTECTED, program_hash="other", instructions=10)),
        (_report(RunMode.BASELINE, instructions=10, inputs={"n": 1}), _report(RunMode.PROTECTED, instructions=10)),
        (_report(RunMode.PROTECTED, instructions=10), _report(RunMode.PROTECTED, instructions=10)),
        (_report(RunMode.BASELINE, instructions=10), _report(RunMode.PROTECTED, Outcome.VIOLATION, instructions=10)),
        (_report(RunMode.BASELINE), _report(RunMode.PROTECTED)),
    ],
)
def test_unusable_report_pairs(baseline, protected):
    with pytest.raises(MetricsError):
        count_overheads(baseline, protected)


def test_aggregate_is_a_ratio_of_totals():
    metrics = [_metrics(100, 150, 8, 32), _metrics(300, 330, 16, 32)]
    agg = aggregate_overheads(metrics)
    assert agg["cases"] == 2
    assert agg["runtime_proxy"] == pytest.approx(480 / 400 - 1)
    assert agg["runtime_proxy_min"] < agg["runtime_proxy"] < agg["runtime_proxy_max"]
    assert agg["memory_proxy"] == pytest.approx(24 / 64)
    assert agg["memory_proxy_min"] < agg["memory_proxy"] < agg["memory_proxy_max"]
    assert agg["per_byte_shadow_bytes"] == 256


def test_aggregate_of_nothing_is_empty():
    assert aggregate_overheads([]) == {}


def test_field_granular_metadata_is_smaller_than_per_byte(flagship_source):
    baseline = run(flagship_source, RunMode.BASELINE, {"bound": 4})
    protected = run(flagship_source, RunMode.PROTECTED, {"bound": 4})
    m = count_overheads(baseline, protected)
    assert m.metadata_bytes < m.per_byte_shadow_bytes
    assert m.runtime_proxy > 0


def test_counter_properties_on_every_corpus_case():
    cases, programs = load_corpus(CORPUS_DIR)
    assert len(cases) == 26
    for case in cases:
        ir = programs[case.source].ir
        interpreter = Interpreter(ir, analyze(ir).tables, RunMode.PROTECTED, RuntimeConfig(log_continue=True))
        protected = interpreter.run(case.inputs)
        baseline = interpret(ir, None, RunMode.BASELINE, case.inputs)
        p, b = protected.counters, baseline.counters

        assert protected.outcome is case.expected[RunMode.PROTECTED], case.id
        assert baseline.outcome is Outcome.COMPLETED, case.id
        live = interpreter.memory.live_allocations()
        assert p.live_metadata_slots == sum(a.slot_count for a in live), case.id
        assert p.metadata_bytes == p.peak_live_metadata_slots * METADATA_ENTRY_BYTES, case.id
        assert p.metadata_bytes < p.per_byte_shadow_bytes, case.id
        assert p.loads_checked == p.loads_executed > 0, case.id
        assert p.stores_recorded == p.stores_executed, case.id
        assert b.instructions == p.instructions, case.id
        assert b.loads_checked == 0 and b.stores_recorded == 0, case.id
        assert baseline.transcript == protected.transcript, case.id
