"""Self-check suite behind ``algcool verify``: each check returns ``(name, passed, detail)``."""

from __future__ import annotations

import itertools

import numpy as np

from . import gates
from . import programs as P
from .analysis import FINITE, IDEAL, check_shannon, run, comparison_tables
from .state import DiagonalState, ThermalConfig


def _comp3_on_equal(eps: float, kind: str) -> float:
    s = DiagonalState.new_thermal([eps] * 3).apply_permutation(gates.TABLES[kind](), (2, 1, 0))
    return s.marginal_bias(2)


def check_bias_gain():
    worst = 0.0
    for eps in (0.01, 0.05, 0.1, 0.3, 0.5, 0.9):
        for kind in (gates.COMP3_PERM, gates.COMP3_TWO_GATE):
            worst = max(worst, abs(_comp3_on_equal(eps, kind) - (3 * eps - eps**3) / 2))
    at01 = _comp3_on_equal(0.1, gates.COMP3_PERM)
    ok = worst <= 1e-12 and abs(at01 - 0.1495) <= 1e-12 and abs(at01 - 0.15) <= 5e-4
    return "bias gain (3e-e^3)/2", ok, f"max error {worst:.2e}, eps=0.1 -> {at01:.6f}"


def check_gain_counts():
    got = [row[2:] for row in comparison_tables().gain_counts]
    ok = got == [(25, 18, 9), (625, 34, 17)]
    return "spin counts for x5 and x25", ok, str(got)


def check_tables():
    t = comparison_tables()
    t1 = [row[2:] for row in t.reference_costs]
    t2 = [(row[0], row[2], row[3]) for row in t.pac1_costs]
    ok = t1 == [(140, 250000), (180, 1250000)] and t2 == [("7.6eps0", 30, 4040), ("17.1eps0", 34, 36440)]
    return "reference and PAC1 cost tables", ok, f"{t1} {t2}"


def check_costs():
    bad = []
    for j in range(1, 9):
        c = P.compile_pac1(j).cost
        if c.total_time_steps != (5 * 3 ** (j - 1) - 1) // 2 or c.reset_steps != 3 ** (j - 1):
            bad.append(j)
    return "PAC1 step counts vs closed form", not bad, f"mismatch at {bad}" if bad else "j_f 1..8"


def check_recursion():
    worst = 0.0
    for eps0 in (0.01, 0.1):
        for j in (1, 2, 3):
            want = P.level_bias(eps0, j)
            for prog in (P.compile_pac1(j), P.compile_pac2(j)):
                got = run(prog, ThermalConfig(eps0=eps0), IDEAL, "exact").summary["target_bias"]
                worst = max(worst, abs(got - want))
    return "recursion fidelity", worst <= 1e-12, f"max error {worst:.2e}"


def random_closed_program(n: int, rng: np.random.Generator, n_ops: int = 6) -> P.Program:
    groups = []
    for _ in range(n_ops):
        k = int(rng.integers(1, min(3, n) + 1))
        bits = tuple(int(b) for b in rng.choice(n, size=k, replace=False))
        table = tuple(int(x) for x in rng.permutation(2**k))
        groups.append((P.Op(P.PERM, bits, table=table),))
    if rng.random() < 0.5:
        groups.append((P.Op(P.PERM, tuple(range(n)), table=tuple(int(x) for x in rng.permutation(2**n))),))
    return P.Program("random", n, ("computation",) * n, groups, tuple(f"b{i}" for i in range(n)))


def check_closed_bound(trials: int = 1000, seed: int = 0):
    rng = np.random.default_rng(seed)
    failures = 0
    for _ in range(trials):
        n = int(rng.integers(2, 9))
        eps0 = float(rng.choice([0.01, 0.05, 0.1, 0.3]))
        prog = random_closed_program(n, rng)
        verdict = check_shannon(run(prog, ThermalConfig(eps0=eps0), IDEAL, "exact"), prog)
        failures += bool(verdict.violations)
    return "closed-system bound", failures == 0, f"{failures} violations in {trials} programs"


def check_bypass():
    prog = P.compile_pac2(3)
    rep = run(prog, ThermalConfig(eps0=0.01), IDEAL, "exact")
    v = check_shannon(rep, prog)
    ok = prog.n_bits == 7 and v.bypass and v.margin > 0.007
    return "open-system bypass", ok, f"bias {rep.summary['target_bias']:.6f}, margin {v.margin:.6f}"


def check_entropy_ledger():
    rep = run(P.compile_demo(), ThermalConfig(eps0=0.1), IDEAL, "exact")
    h = [r.h_total for r in rep.records]
    ok = abs(h[1] - h[0]) <= 1e-12 and h[0] - h[-1] >= 1e-5
    return "demo entropy ledger", ok, f"H {h[0]:.6f} -> {h[-1]:.6f}"


def check_finite(ratios=(10.0, 100.0, 1000.0, 10000.0)):
    prog = P.compile_pac2(2)
    ideal = P.level_bias(0.01, 2)
    finals = []
    for r in ratios:
        cfg = ThermalConfig.from_ratio(0.01, r, compute_duration=1.0, reset_duration=5.0)
        finals.append(run(prog, cfg, FINITE, "exact").summary["target_bias"])
    at1000 = finals[ratios.index(1000.0)]
    at10 = finals[ratios.index(10.0)]
    ok = (abs(at1000 - ideal) <= 0.01 * ideal and (ideal - at10) > 0.01 * ideal
          and all(a < b for a, b in itertools.pairwise(finals)))
    return "finite relaxation", ok, "R " + ", ".join(f"{r:g}: {f:.6f}" for r, f in zip(ratios, finals))


CHECKS = (check_bias_gain, check_gain_counts, check_tables, check_costs, check_recursion,
          check_closed_bound, check_bypass, check_entropy_ledger, check_finite)


def verify_all(seed: int = 0, trials: int = 1000):
    results = []
    for check in CHECKS:
        if check is check_closed_bound:
            results.append(check(trials, seed))
        else:
            results.append(check())
    return results
