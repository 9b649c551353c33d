import csv
import io
import math

import pytest

from repeater_alloc import analysis
from repeater_alloc.analysis import (
    SWEEP_HEADER,
    TIMING_HEADER,
    ProtocolError,
    SweepConfig,
    SweepRow,
    TimingRow,
    instance_trends,
    monotone,
    multi_sweep,
    rows_to_csv,
    summarize,
    sweep,
    timing_harness,
    timing_summary,
)
from repeater_alloc.errors import InfeasibleError

SMALL = SweepConfig(n=10, radius=0.9, l_max=0.9, n_max=4, k=2, d=3, max_attempts=500)


def test_varied_and_invalid_parameter():
    assert SMALL.varied("d", 5).d == 5
    assert SMALL.varied("k", 1).k == 1
    assert SMALL.varied("lmax", 1.2).l_max == 1.2
    with pytest.raises(ValueError):
        SMALL.varied("radius", 1)


@pytest.mark.parametrize("vary,value", [("d", 2), ("k", 3), ("lmax", 0.5)])
def test_stricter_value_rejected(vary, value):
    with pytest.raises(ValueError, match="stricter"):
        sweep(SMALL, vary, [value], 1)


def test_small_sweep_monotone_per_instance():
    grid = {"d": [3, 4, 6], "k": [2, 1], "lmax": [0.9, 1.2]}
    res = multi_sweep(SMALL, grid, n_instances=3, seed=4)
    assert set(res) == set(grid)
    for vary, direction in (("d", "nonincreasing"), ("k", "nonincreasing"), ("lmax", "nonincreasing")):
        rows = res[vary]
        assert len(rows) == 3 * len(grid[vary])
        assert [r.param_value for r in rows] == [v for v in grid[vary] for _ in range(3)]
        assert all(instance_trends(rows, direction).values())
    # the base value appears in every sweep and must give identical counts
    base = {r.instance_id: r.repeater_count for r in res["d"] if r.param_value == 3}
    assert base == {r.instance_id: r.repeater_count for r in res["k"] if r.param_value == 2}
    # fewer disjoint paths means no more required connectivity
    for r in res["k"]:
        assert r.connectivity >= 1


def test_sweep_is_reproducible():
    a = sweep(SMALL, "d", [3, 5], 2, seed=11)
    b = sweep(SMALL, "d", [3, 5], 2, seed=11)
    strip = lambda rows: [(r.param_value, r.instance_id, r.repeater_count, r.connectivity) for r in rows]
    assert strip(a) == strip(b)
    assert [analysis.draw_instance(SMALL, 11, i).network for i in range(2)] == [
        analysis.draw_instance(SMALL, 11, i).network for i in range(2)
    ]


def test_protocol_error_when_looser_value_fails(monkeypatch):
    real = analysis.plan

    def flaky(net, req, opts):
        if req.d != SMALL.d:
            raise InfeasibleError("ilp", "forced")
        return real(net, req, opts)

    monkeypatch.setattr(analysis, "plan", flaky)
    with pytest.raises(ProtocolError, match="d=4"):
        sweep(SMALL, "d", [3, 4], 1, seed=2)


def test_summary_and_csv():
    rows = [SweepRow(4, 0, 10, 2, 1.23456, "optimal"), SweepRow(4, 1, 12, 3, 2.0, "optimal"),
            SweepRow(6, 0, 8, 2, 0.5, "optimal")]
    s = summarize(rows)
    assert [d["param_value"] for d in s] == [4, 6]
    assert s[0]["repeaters_mean"] == 11 and s[0]["repeaters_stderr"] == pytest.approx(1.0)
    assert s[1]["repeaters_stderr"] == 0.0
    text = rows_to_csv(rows)
    parsed = list(csv.DictReader(io.StringIO(text)))
    assert list(parsed[0]) == SWEEP_HEADER
    assert parsed[0]["solve_ms"] == "1.235"
    assert rows_to_csv([]).strip() == ",".join(SWEEP_HEADER)


def test_monotone_helper():
    assert monotone([5, 5, 3], "nonincreasing")
    assert not monotone([5, 6], "nonincreasing")
    assert monotone([1, 2, 2], "nondecreasing")


def test_timing_harness_shape():
    cfg = SweepConfig(l_max=1.0, n_max=6, k=1, d=8, max_attempts=50, time_limit=30.0)
    rows = timing_harness([6, 8, 10], 1, cfg, seed=3)
    assert [r.size for r in rows] == [6, 8, 10]
    assert all(r.status == "optimal" for r in rows)
    summary = timing_summary(rows)
    assert list(summary[0]) == TIMING_HEADER
    assert all(d["solved"] == 1 for d in summary)


def test_timing_exhausted_row():
    rows = [TimingRow(6, 0, 10, float("nan"), "exhausted"), TimingRow(6, 1, 12, 4.0, "censored")]
    (s,) = timing_summary(rows)
    assert s["exhausted"] == 1 and s["censored"] == 1 and s["solved"] == 0
    assert s["mean_ms"] == 4.0 and s["mean_vars"] == 11
    rows = [TimingRow(6, 0, 10, float("nan"), "exhausted")]
    assert math.isnan(timing_summary(rows)[0]["mean_ms"])
