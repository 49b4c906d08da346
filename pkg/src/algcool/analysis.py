"""Run programs on exact states, keep per-step ledgers, and compare against bounds."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from typing import Sequence

from . import programs as P
from .state import (
    DEFAULT_MAX_BITS,
    BiasTracker,
    DiagonalState,
    RepresentationCapError,
    ThermalConfig,
)
from .thermo import entropy_of_bias, rpc_spins_for_gain, shannon_bound_bias

IDEAL = "ideal"
FINITE = "finite"
MODES = (IDEAL, FINITE)

AGREE_TOL = 1e-12
ENTROPY_TOL = 1e-12


@dataclass(frozen=True)
class StepRecord:
    step: int
    op: str
    biases: tuple[float, ...]
    h_total: float | None
    h_bits: tuple[float, ...]
    compute_steps: int
    reset_steps: int
    time_steps: int
    wall_time: float


@dataclass
class RunReport:
    program: str
    n_bits: int
    mode: str
    backend: str
    eps0: float
    initial_biases: tuple[float, ...]
    closed: bool
    records: list[StepRecord]
    summary: dict
    violations: list[str] = field(default_factory=list)
    tracker_valid: bool = True
    final_state: DiagonalState | None = field(default=None, repr=False)

    @property
    def final(self) -> StepRecord:
        return self.records[-1]

    @property
    def initial(self) -> StepRecord:
        return self.records[0]

    def columns(self) -> list[str]:
        return (["step", "op"] + [f"bias_{i}" for i in range(self.n_bits)]
                + ["H_total", "resets", "time", "wall_time"])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns())
        for r in self.records:
            h = "" if r.h_total is None else _num(r.h_total)
            w.writerow([r.step, r.op] + [_num(b) for b in r.biases]
                       + [h, r.reset_steps, r.time_steps, _num(r.wall_time)])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(self.summary, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _num(x: float) -> str:
    return format(float(x), ".17g")


def _apply_exact(state: DiagonalState, op: P.Op, config: ThermalConfig) -> DiagonalState:
    if op.kind == P.RESET_OP:
        for b in op.bits:
            state = state.apply_reset(b, config.equilibrium(state.roles[b]))
        return state
    if op.kind == P.WAIT:
        return state.relax(op.duration, config)
    return state.apply_permutation(op.permutation(), op.bits)


def run(program: P.Program, config: ThermalConfig | None = None, mode: str = IDEAL,
        backend: str = "auto", max_bits: int = DEFAULT_MAX_BITS,
        initial_biases: Sequence[float] | None = None) -> RunReport:
    """Execute ``program`` and record every parallel group.

    In ideal mode RESET is an exact rethermalization and only WAIT relaxes.
    In finite mode every compute group is followed by relaxation for
    ``config.compute_duration``; a RESET group lets the whole register relax
    for ``config.reset_duration`` and leaves the named bits at equilibrium.

    ``backend`` is ``"exact"`` (dense distribution plus tracker cross-check),
    ``"tracker"`` (per-bit biases only) or ``"auto"``.
    """
    config = config or ThermalConfig()
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if backend == "auto":
        backend = "exact" if program.n_bits <= max_bits else "tracker"
    if backend == "exact" and program.n_bits > max_bits:
        raise RepresentationCapError(
            f"{program.name} needs {program.n_bits} bits, above the dense cap of {max_bits}; "
            "run with backend='tracker'"
        )
    if backend not in ("exact", "tracker"):
        raise ValueError(f"unknown backend {backend!r}")

    init = list(initial_biases) if initial_biases is not None else config.equilibrium_biases(program.roles)
    tracker = BiasTracker(init, program.roles)
    state = DiagonalState.new_thermal(init, program.roles, max_bits) if backend == "exact" else None
    violations: list[str] = []
    records = [_record(0, "INIT", state, tracker, 0, 0, 0, 0.0)]
    compute = resets = time = 0
    wall = 0.0

    for gi, group in enumerate(program.groups, start=1):
        is_reset = any(op.is_reset for op in group)
        h_before = records[-1].h_total
        if mode == FINITE and is_reset:
            wait = max([config.reset_duration] + [op.duration for op in group if op.kind == P.WAIT])
            if state is not None:
                state = state.relax(wait, config)
            tracker = tracker.relax(wait, config)
            group_ops = [op for op in group if op.kind == P.RESET_OP]
            wall += wait
        else:
            group_ops = list(group)
        for op in group_ops:
            if state is not None:
                state = _apply_exact(state, op, config)
            tracker = tracker.apply(op, config)
        if mode == FINITE and not is_reset:
            if state is not None:
                state = state.relax(config.compute_duration, config)
            tracker = tracker.relax(config.compute_duration, config)
            wall += config.compute_duration
        elif mode == IDEAL:
            wall += sum(op.duration for op in group if op.kind == P.WAIT)

        if is_reset:
            resets += 1
        else:
            compute += len(group)
            time += max(op.time_cost for op in group)
        label = " ".join(program.format_op(op) for op in group)
        rec = _record(gi, label, state, tracker, compute, resets, time, wall)
        records.append(rec)

        if state is not None:
            if mode == IDEAL and not is_reset and abs(rec.h_total - h_before) > ENTROPY_TOL:
                violations.append(f"step {gi}: entropy changed by {rec.h_total - h_before:.3e} at a gate")
            if tracker.independence_valid:
                diff = max(abs(a - b) for a, b in zip(rec.biases, tracker.biases))
                if diff > AGREE_TOL:
                    violations.append(f"step {gi}: tracker disagrees with exact state by {diff:.3e}")
        if any(abs(b) > 1.0 + 1e-12 for b in rec.biases):
            violations.append(f"step {gi}: bias outside [-1, 1]")

    if backend == "tracker" and not tracker.independence_valid:
        violations.append("tracker lost independence; biases are approximate")

    closed = program.closed and mode == IDEAL
    report = RunReport(program.name, program.n_bits, mode, backend, config.eps0, tuple(init),
                       closed, records, {}, violations, tracker.independence_valid, state)
    report.summary = _summary(report, program, config)
    return report


def _record(step, label, state, tracker, compute, resets, time, wall) -> StepRecord:
    if state is not None:
        biases = tuple(state.biases())
        h_total = state.total_entropy()
        h_bits = tuple(state.single_bit_entropy(i) for i in range(state.n_bits))
    else:
        biases = tuple(tracker.biases)
        h_total = None
        h_bits = tuple(entropy_of_bias(max(-1.0, min(1.0, b))) for b in biases)
    return StepRecord(step, label, biases, h_total, h_bits, compute, resets, time, wall)


def _uniform(biases: Sequence[float]) -> bool:
    return all(b == biases[0] for b in biases)


def _summary(report: RunReport, program: P.Program, config: ThermalConfig) -> dict:
    final = report.final
    n = report.n_bits
    target = program.target
    if target is None:
        target = max(range(n), key=lambda i: final.biases[i])
    predicted = None
    if program.level and _uniform(report.initial_biases):
        predicted = P.level_bias(report.initial_biases[0], program.level)
    bound = config.eps0 * math.sqrt(n)
    max_bias = max(final.biases)
    return {
        "program": program.name,
        "n_bits": n,
        "mode": report.mode,
        "backend": report.backend,
        "eps0": config.eps0,
        "r_relax": config.r_relax,
        "target_bit": target,
        "target_bias": final.biases[target],
        "target_biases": [final.biases[t] for t in program.targets],
        "predicted_bias": predicted,
        "max_bias": max_bias,
        "shannon_bound": bound,
        "bypass_margin": max_bias - bound,
        "bypass_margin_definition": "max final bias minus eps0*sqrt(n), n counting every register bit",
        "H_total_initial": report.initial.h_total,
        "H_total_final": final.h_total,
        "compute_steps": final.compute_steps,
        "reset_steps": final.reset_steps,
        "total_time_steps": final.time_steps,
        "wall_time": final.wall_time,
        "tracker_valid": report.tracker_valid,
        "violations": list(report.violations),
    }


@dataclass(frozen=True)
class BoundVerdict:
    closed: bool
    sqrt_form_applicable: bool
    entropy_floor: float | None
    min_single_bit_entropy: float | None
    entropy_bound_ok: bool | None
    bound: float | None
    max_bias: float
    margin: float | None
    slack: float | None
    sqrt_bound_ok: bool | None
    violations: tuple[str, ...]

    @property
    def bypass(self) -> bool:
        return not self.closed and self.margin is not None and self.margin > 0


def check_shannon(report: RunReport, program: P.Program | None = None) -> BoundVerdict:
    """Compare a run against the closed-system limits.

    For a closed run, every single-bit entropy at every record must stay at or
    above ``H_total(initial) - (n - 1)``, and with a uniform start no bias may
    exceed ``eps0 * sqrt(n)`` by more than ``2 eps0**3 n``. For an open run the
    verdict reports the margin ``max_bias - eps0 * sqrt(n)``; positive margins
    beat the bound.
    """
    closed = report.closed if program is None else (program.closed and report.mode == IDEAL)
    n = report.n_bits
    init = report.initial_biases
    uniform = _uniform(init) and init[0] >= 0
    violations = []
    max_bias = max(max(r.biases) for r in report.records) if closed else max(report.final.biases)

    floor = min_h = ok_entropy = None
    if report.initial.h_total is not None:
        floor = report.initial.h_total - (n - 1)
        min_h = min(min(r.h_bits) for r in report.records)
        if closed:
            ok_entropy = min_h >= floor - ENTROPY_TOL
            if not ok_entropy:
                violations.append(f"single-bit entropy {min_h!r} below floor {floor!r}")

    bound = margin = slack = ok_sqrt = None
    if uniform:
        eps0 = init[0]
        bound = shannon_bound_bias(n, eps0)
        margin = max_bias - eps0 * math.sqrt(n)
        if closed:
            slack = 2 * eps0**3 * n
            ok_sqrt = max_bias <= eps0 * math.sqrt(n) + slack
            if not ok_sqrt:
                violations.append(f"bias {max_bias!r} above eps0*sqrt(n) + slack")
    return BoundVerdict(closed, uniform, floor, min_h, ok_entropy, bound, max_bias, margin,
                        slack, ok_sqrt, tuple(violations))


# -- comparison tables ---------------------------------------------------------

def round_half_up(x: float, places: int = 1) -> Decimal:
    return Decimal(repr(x)).quantize(Decimal(1).scaleb(-places), rounding=ROUND_HALF_UP)


@dataclass(frozen=True)
class ComparisonTables:
    gain_counts: tuple[tuple, ...]
    reference_costs: tuple[tuple, ...]
    pac1_costs: tuple[tuple, ...]

    GAIN_HEADER = ("multiplier", "J_f", "RPC", "PAC1", "PAC2")
    REFERENCE_HEADER = ("eps_desired", "j_f", "N", "T_bound")
    PAC1_HEADER = ("eps_desired", "J_f", "N", "T")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        for name, header, rows in self._sections():
            w.writerow(["table", *header])
            for row in rows:
                w.writerow([name, *row])
        return buf.getvalue()

    def to_text(self) -> str:
        out = []
        out.append("Spins needed to raise one bias by a factor (all spins start at eps0)")
        for m, j, rpc, p1, p2 in self.gain_counts:
            out.append(f"  x{m}: RPC {rpc}, PAC1 {p1}, PAC2 {p2}  (J_f={j})")
        out.append("Earlier block algorithm, 20 cooled bits (published formulas, T is an upper bound)")
        out.append(f"  {'eps_desired':>11} {'j_f':>4} {'N':>5} {'T_bound':>10}")
        for d, j, n, t in self.reference_costs:
            out.append(f"  {d:>11} {j:>4} {n:>5} {_sci(t):>10}")
        out.append("PAC1, 20 cooled bits")
        out.append(f"  {'eps_desired':>11} {'J_f':>4} {'N':>5} {'T':>10}")
        for d, j, n, t in self.pac1_costs:
            out.append(f"  {d:>11} {j:>4} {n:>5} {t:>10}")
        return "\n".join(out) + "\n"

    def _sections(self):
        return (("gain_counts", self.GAIN_HEADER, self.gain_counts),
                ("reference_costs", self.REFERENCE_HEADER, self.reference_costs),
                ("pac1_costs", self.PAC1_HEADER, self.pac1_costs))


def _sci(t: int) -> str:
    exp = 4
    mant, rem = divmod(t, 10**exp)
    return f"{mant}x10^{exp}" if rem == 0 else str(t)


def comparison_tables(multipliers=(5, 25), reference_levels=(3, 4), pac1_levels=(5, 7),
                  cooled_bits: int = 20) -> ComparisonTables:
    gain_counts = []
    for m in multipliers:
        j = P.levels_for_gain(m)
        costs = P.closed_form_costs(j)
        gain_counts.append((m, j, rpc_spins_for_gain(m), costs["pac1_bits"], costs["pac2_bits"]))
    reference_costs = []
    for j in reference_levels:
        ref = P.block_reference_costs(j, cooled_bits)
        reference_costs.append((f"{ref['bias_multiplier']}eps0", j, ref["bits_approx"], ref["time_bound"]))
    pac1_costs = []
    for j in pac1_levels:
        costs = P.closed_form_costs(j)
        mult = round_half_up(costs["bias_multiplier_smalleps"], 1)
        pac1_costs.append((f"{mult}eps0", j, 2 * j + cooled_bits, cooled_bits * costs["time_steps"]))
    return ComparisonTables(tuple(gain_counts), tuple(reference_costs), tuple(pac1_costs))


# -- parameter sweeps ----------------------------------------------------------

FAMILIES = ("pac1", "pac2", "demo", "mj")
R_WARN = 100.0


def build_program(family: str, j_f: int = 1, m: int = 1, j: int | None = None, k: int | None = None,
                  comp3: str = "COMP3_PERM") -> P.Program:
    if family == "pac1":
        return P.compile_pac1_multi(m, j_f, comp3) if m > 1 else P.compile_pac1(j_f, comp3)
    if family == "pac2":
        return P.compile_pac2(j_f, comp3)
    if family == "demo":
        return P.compile_demo(comp3)
    if family == "mj":
        j = j_f if j is None else j
        return P.compile_m(j, 2 * j + 1 if k is None else k, comp3=comp3)
    raise ValueError(f"unknown program family {family!r}; choose from {FAMILIES}")


@dataclass
class SweepReport:
    program: str
    rows: list[dict]

    COLUMNS = ("eps0", "r_relax", "compute_duration", "reset_duration", "final_bias",
               "ideal_bias", "relative_deficit", "r_warning")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.COLUMNS)
        for row in self.rows:
            w.writerow([_num(row[c]) if isinstance(row[c], float) else int(row[c]) if isinstance(row[c], bool)
                        else row[c] for c in self.COLUMNS])
        return buf.getvalue()


def sweep(program: P.Program, eps0s: Sequence[float], ratios: Sequence[float],
          compute_durations: Sequence[float] = (1.0,), reset_durations: Sequence[float] = (5.0,),
          t1_reset: float = 1.0, backend: str = "auto") -> SweepReport:
    """Final target-bit bias in finite mode over a grid, against the ideal run.

    ``t1_comp = ratio * t1_reset``; durations are absolute.
    """
    if not eps0s or not ratios or not compute_durations or not reset_durations:
        raise ValueError("every sweep range needs at least one value")
    rows = []
    target = program.target
    for eps0 in eps0s:
        ideal = run(program, ThermalConfig(eps0=eps0), IDEAL, backend).final.biases
        for r in ratios:
            for dc in compute_durations:
                for dr in reset_durations:
                    cfg = ThermalConfig(eps0=eps0, t1_comp=r * t1_reset, t1_reset=t1_reset,
                                        compute_duration=dc, reset_duration=dr)
                    rep = run(program, cfg, FINITE, backend)
                    t = target if target is not None else max(range(program.n_bits), key=lambda i: ideal[i])
                    fb, ib = rep.final.biases[t], ideal[t]
                    rows.append({
                        "eps0": float(eps0), "r_relax": float(r), "compute_duration": float(dc),
                        "reset_duration": float(dr), "final_bias": fb, "ideal_bias": ib,
                        "relative_deficit": (ib - fb) / ib if ib else 0.0,
                        "r_warning": r < R_WARN,
                    })
    return SweepReport(program.name, rows)
