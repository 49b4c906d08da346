import csv
import io
import json
import math
from decimal import Decimal
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from algcool import programs as P
from algcool.analysis import FINITE, IDEAL, check_shannon, round_half_up, run, sweep, comparison_tables
from algcool.state import RepresentationCapError, ThermalConfig
from algcool.verify import random_closed_program

import oracle

GOLDEN = Path(__file__).parent / "golden"


def test_demo_entropy_ledger_frozen():
    rep = run(P.compile_demo(), ThermalConfig(eps0=0.1))
    h = [r.h_total for r in rep.records]
    assert h[0] == pytest.approx(6 * oracle.entropy(oracle.thermal([0.1])), abs=1e-12)
    assert h[1] == pytest.approx(h[0], abs=1e-12)
    assert h[2] == pytest.approx(h[0], abs=1e-12)
    assert h[3] == pytest.approx(5.9476893728625, abs=1e-10)
    assert rep.final.biases[4] == pytest.approx(0.1495, abs=1e-14)
    assert not rep.violations


def test_exact_and_tracker_backends_agree():
    prog = P.compile_pac1(2)
    a = run(prog, ThermalConfig(eps0=0.05), backend="exact")
    b = run(prog, ThermalConfig(eps0=0.05), backend="tracker")
    assert a.final.biases == pytest.approx(b.final.biases, abs=1e-12)
    assert b.final.h_total is None
    assert b.tracker_valid and not b.violations


def test_large_register_uses_tracker():
    prog = P.compile_pac1(6)
    with pytest.raises(RepresentationCapError):
        run(prog, backend="exact")
    rep = run(prog, ThermalConfig(eps0=0.01))
    assert rep.backend == "tracker"
    assert rep.summary["target_bias"] == pytest.approx(P.level_bias(0.01, 6), abs=1e-12)


def test_summary_fields():
    rep = run(P.compile_pac2(3), ThermalConfig(eps0=0.01))
    s = json.loads(rep.to_json())
    assert s["target_bias"] == pytest.approx(0.0337406505, abs=1e-10)
    assert s["predicted_bias"] == pytest.approx(s["target_bias"], abs=1e-15)
    assert s["shannon_bound"] == pytest.approx(0.01 * math.sqrt(7))
    assert (s["compute_steps"], s["reset_steps"], s["total_time_steps"]) == (94, 26, 94)


def test_ledger_csv_columns():
    rep = run(P.compile_demo(), ThermalConfig(eps0=0.1))
    rows = list(csv.reader(io.StringIO(rep.to_csv())))
    assert rows[0] == ["step", "op"] + [f"bias_{i}" for i in range(6)] + ["H_total", "resets", "time", "wall_time"]
    assert len(rows) == 1 + len(rep.records)
    assert float(rows[-1][6]) == rep.final.biases[4]


def test_eps_comp_differs_from_eps0():
    prog = P.compile_pac2(1)
    rep = run(prog, ThermalConfig(eps0=0.1, eps_comp=0.02))
    dist = oracle.execute(prog, 0.1, eps_comp=0.02)
    assert rep.final.biases == pytest.approx([oracle.bias(dist, i) for i in range(3)], abs=1e-13)
    assert rep.summary["predicted_bias"] is None


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([0.01, 0.1, 0.3]))
def test_closed_programs_respect_bounds(seed, eps0):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 7))
    prog = random_closed_program(n, rng)
    rep = run(prog, ThermalConfig(eps0=eps0))
    v = check_shannon(rep, prog)
    assert v.closed and not v.violations
    assert not v.bypass
    h = [r.h_total for r in rep.records]
    assert max(h) - min(h) <= 1e-10


def test_open_program_bypasses_bound():
    prog = P.compile_pac2(3)
    v = check_shannon(run(prog, ThermalConfig(eps0=0.01)), prog)
    assert not v.closed and v.bypass
    assert v.margin == pytest.approx(0.0337406505 - 0.01 * math.sqrt(7), abs=1e-10)


def test_finite_mode_monotone_in_ratio():
    prog = P.compile_pac2(2)
    finals = [run(prog, ThermalConfig.from_ratio(0.01, r), FINITE).summary["target_bias"]
              for r in (10, 100, 1000, 10000, math.inf)]
    assert all(a < b for a, b in zip(finals, finals[1:]))
    assert finals[-1] == pytest.approx(P.level_bias(0.01, 2), abs=1e-15)


def test_finite_mode_wall_time():
    prog = P.compile_pac2(1)
    cfg = ThermalConfig.from_ratio(0.01, 100.0, compute_duration=0.5, reset_duration=3.0)
    rep = run(prog, cfg, FINITE)
    assert rep.final.wall_time == pytest.approx(4 * 0.5 + 2 * 3.0)


def test_wait_op_relaxes_in_ideal_mode():
    prog = P.Program("w", 1, ("reset",), [(P.Op(P.PERM, (0,), table=(1, 0)),), (P.Op(P.WAIT, duration=1.0),)])
    rep = run(prog, ThermalConfig(eps0=0.2))
    assert rep.final.biases[0] == pytest.approx(0.2 - 0.4 * math.exp(-1.0))


def test_tables_golden():
    t = comparison_tables()
    assert t.to_csv() == (GOLDEN / "tables.csv").read_text()
    assert t.to_text() == (GOLDEN / "tables.txt").read_text()
    assert t.gain_counts == ((5, 4, 25, 18, 9), (25, 8, 625, 34, 17))


@pytest.mark.parametrize("x, want", [(7.59375, "7.6"), (17.0859375, "17.1"), (0.25, "0.3"), (2.25, "2.3")])
def test_round_half_up(x, want):
    assert round_half_up(x) == Decimal(want)


def test_sweep_rows():
    rep = sweep(P.compile_pac2(2), [0.01], [10.0, 1000.0])
    assert [r["r_warning"] for r in rep.rows] == [True, False]
    assert rep.rows[1]["relative_deficit"] < 0.01 < rep.rows[0]["relative_deficit"]
    lines = rep.to_csv().splitlines()
    assert lines[0].split(",") == list(rep.COLUMNS)
    assert lines[1].endswith(",1")
    with pytest.raises(ValueError):
        sweep(P.compile_pac2(1), [], [10.0])


def test_bad_mode_and_backend():
    with pytest.raises(ValueError):
        run(P.compile_pac2(1), mode="fast")
    with pytest.raises(ValueError):
        run(P.compile_pac2(1), backend="gpu")
