"""Compile cooling procedures into explicit step programs with cost accounting.

A program is an ordered list of parallel groups; each group is a tuple of
ops touching disjoint bits. Op kinds:

* ``PT``    polarization transfer, ``bits = (source, destination)`` (a SWAP)
* ``RESET`` rethermalize reset bits, ``bits = (r, ...)``
* ``WAIT``  let every bit relax for ``duration``
* any gate kind from :mod:`algcool.gates`, ``bits`` in operand order
* ``PERM``  an arbitrary permutation ``table`` on the operand patterns

Time accounting: each non-reset group costs the largest time of its ops
(1 for PT and single-table gates, 2 for the two-gate 3B-Comp); each RESET or
WAIT group is one reset step and is not counted in ``total_time_steps``.

Register layouts (index 0 is the rightmost spin ``a_1``):

* PAC1 / ``M_j``: computation bit ``a_i`` at index ``2(i-1)``, its reset
  partner ``r_i`` at ``2(i-1)+1``.
* PAC2: the single reset bit is ``a_1`` at index 0, computation bits
  ``a_2 .. a_{2J+1}`` follow on a line.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from . import gates
from .state import COMPUTATION, RESET

PT = "PT"
RESET_OP = "RESET"
WAIT = "WAIT"
PERM = "PERM"
OP_KINDS = (PT, RESET_OP, WAIT, PERM) + gates.GATE_KINDS
COMP3_KINDS = (gates.COMP3_PERM, gates.COMP3_TWO_GATE)


class CompileError(ValueError):
    pass


@dataclass(frozen=True)
class Op:
    kind: str
    bits: tuple[int, ...] = ()
    duration: float | None = None
    table: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.kind not in OP_KINDS:
            raise ValueError(f"unknown op {self.kind!r}")
        object.__setattr__(self, "bits", tuple(int(b) for b in self.bits))
        if len(set(self.bits)) != len(self.bits):
            raise ValueError(f"repeated bit in {self.kind}{self.bits}")
        if self.kind in gates.ARITY:
            gates.GateSpec(self.kind, self.bits)
        elif self.kind == PT and len(self.bits) != 2:
            raise ValueError("PT takes (source, destination)")
        elif self.kind == WAIT and (self.duration is None or self.duration < 0):
            raise ValueError("WAIT needs a non-negative duration")
        elif self.kind == PERM:
            table = tuple(int(y) for y in self.table or ())
            if len(table) != 2 ** len(self.bits) or not gates.is_bijection(table):
                raise ValueError(f"PERM table is not a bijection on {len(self.bits)}-bit patterns")
            object.__setattr__(self, "table", table)

    def permutation(self) -> tuple[int, ...]:
        if self.kind == PERM:
            return self.table
        if self.kind == PT:
            return gates.pt_swap_table()
        return gates.TABLES[self.kind]()

    @property
    def is_reset(self) -> bool:
        return self.kind in (RESET_OP, WAIT)

    @property
    def time_cost(self) -> int:
        return 2 if self.kind == gates.COMP3_TWO_GATE else 1

    def to_dict(self) -> dict:
        d = {"op": self.kind}
        if self.kind != WAIT:
            d["bits"] = list(self.bits)
        else:
            d["duration"] = self.duration
        if self.kind == PERM:
            d["table"] = list(self.table)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Op":
        table = tuple(d["table"]) if "table" in d else None
        return cls(d["op"], tuple(d.get("bits", ())), d.get("duration"), table)


@dataclass(frozen=True)
class Cost:
    compute_steps: int
    reset_steps: int
    total_time_steps: int


def count_cost(groups: Iterable[Sequence[Op]]) -> Cost:
    compute = resets = time = 0
    for group in groups:
        if any(op.is_reset for op in group):
            resets += 1
        else:
            compute += len(group)
            time += max(op.time_cost for op in group)
    return Cost(compute, resets, time)


@dataclass(frozen=True)
class Program:
    name: str
    n_bits: int
    roles: tuple[str, ...]
    groups: tuple[tuple[Op, ...], ...]
    names: tuple[str, ...] = ()
    targets: tuple[int, ...] = ()
    level: int = 0
    notation: str = ""
    cost: Cost = field(default=None)

    def __post_init__(self):
        groups = tuple(tuple(g) for g in self.groups)
        object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "roles", tuple(self.roles))
        object.__setattr__(self, "names", tuple(self.names) or tuple(f"b{i}" for i in range(self.n_bits)))
        if self.cost is None:
            object.__setattr__(self, "cost", count_cost(groups))
        self.validate()

    def validate(self) -> None:
        if len(self.roles) != self.n_bits or len(self.names) != self.n_bits:
            raise CompileError("roles and names must have one entry per bit")
        for i, group in enumerate(self.groups):
            if not group:
                raise CompileError(f"group {i} is empty")
            touched = [b for op in group for b in op.bits]
            if any(not 0 <= b < self.n_bits for b in touched):
                raise CompileError(f"group {i} references a bit outside the {self.n_bits}-bit register")
            if len(set(touched)) != len(touched):
                raise CompileError(f"group {i} touches a bit twice")
            if any(op.is_reset for op in group) and not all(op.is_reset for op in group):
                raise CompileError(f"group {i} mixes RESET/WAIT with compute ops")
        if count_cost(self.groups) != self.cost:
            raise CompileError("stored cost does not match the step list")

    @property
    def ops(self) -> list[Op]:
        return [op for g in self.groups for op in g]

    @property
    def closed(self) -> bool:
        return not any(op.is_reset for op in self.ops)

    @property
    def target(self) -> int | None:
        return self.targets[0] if self.targets else None

    def reset_bits(self) -> list[int]:
        return [i for i, r in enumerate(self.roles) if r == RESET]

    def to_jsonl(self) -> str:
        """Header object line, then one JSON array of ops per parallel group."""
        header = {
            "program": self.name,
            "n_bits": self.n_bits,
            "roles": list(self.roles),
            "names": list(self.names),
            "targets": list(self.targets),
            "level": self.level,
            "notation": self.notation,
            "cost": {
                "compute_steps": self.cost.compute_steps,
                "reset_steps": self.cost.reset_steps,
                "total_time_steps": self.cost.total_time_steps,
            },
        }
        lines = [json.dumps(header, ensure_ascii=False)]
        lines += [json.dumps([op.to_dict() for op in g]) for g in self.groups]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text: str) -> "Program":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        header = json.loads(lines[0])
        groups = tuple(tuple(Op.from_dict(d) for d in json.loads(ln)) for ln in lines[1:])
        return cls(
            header["program"], header["n_bits"], tuple(header["roles"]), groups,
            tuple(header["names"]), tuple(header["targets"]), header["level"],
            header["notation"], Cost(**header["cost"]),
        )

    def format_op(self, op: Op) -> str:
        n = self.names
        if op.kind == PT:
            return f"PT({n[op.bits[0]]}→{n[op.bits[1]]})"
        if op.kind == RESET_OP:
            return f"RESET({','.join(n[b] for b in op.bits)})"
        if op.kind == WAIT:
            return f"WAIT({op.duration:g})"
        label = "3B-Comp" if op.kind in COMP3_KINDS else op.kind
        return f"{label}({';'.join(n[b] for b in op.bits)})"

    def listing(self) -> str:
        """One line per parallel group in PT/RESET/3B-Comp notation."""
        width = len(str(len(self.groups)))
        lines = [f"{i + 1:>{width}}  " + " ".join(self.format_op(op) for op in g)
                 for i, g in enumerate(self.groups)]
        return "\n".join(lines) + "\n"


# -- closed forms -----------------------------------------------------------

def level_bias(eps0: float, j: int) -> float:
    """Exact purification-level bias: ``eps <- (3 eps - eps**3) / 2`` applied ``j`` times."""
    eps = eps0
    for _ in range(j):
        eps = gates.predicted_comp3_bias(eps)
    return eps


def time_steps_recurrence(j: int) -> int:
    """``T_0 = 1``, ``T_1 = 2``, ``T_j = 3 T_{j-1} + 1``."""
    if j == 0:
        return 1
    t = 2
    for _ in range(j - 1):
        t = 3 * t + 1
    return t


def _check_jf(j_f: int) -> None:
    if int(j_f) != j_f or j_f < 1:
        raise CompileError(f"target level must be an integer >= 1, got {j_f!r}")


def closed_form_costs(j_f: int) -> dict:
    _check_jf(j_f)
    return {
        "time_steps": (5 * 3 ** (j_f - 1) - 1) // 2,
        "reset_steps": 3 ** (j_f - 1),
        "pac1_bits": 4 * j_f + 2,
        "pac2_bits": 2 * j_f + 1,
        "bias_multiplier_smalleps": 1.5**j_f,
    }


def block_reference_costs(j_f: int, cooled_bits: int = 0) -> dict:
    """Published cost formulas of the earlier block algorithm (comparator only).

    ``time_bound`` is an upper bound, not a count.
    """
    _check_jf(j_f)
    return {
        "bits_approx": 40 * j_f + cooled_bits,
        "time_bound": 400 * 5 ** (j_f + 1),
        "bias_multiplier": 2**j_f,
    }


def levels_for_gain(multiplier) -> int:
    """Smallest ``J`` with ``(3/2)**J >= multiplier``."""
    target = Fraction(multiplier)
    j, gain = 0, Fraction(1)
    while gain < target:
        j += 1
        gain *= Fraction(3, 2)
    return j


# -- compilers ---------------------------------------------------------------

def _comp3(kind: str, bits) -> Op:
    if kind not in COMP3_KINDS:
        raise CompileError(f"3B-Comp form must be one of {COMP3_KINDS}, got {kind!r}")
    return Op(kind, tuple(bits))


def _pac1_layout(n_comp: int):
    roles, names = [], []
    for i in range(1, n_comp + 1):
        roles += [COMPUTATION, RESET]
        names += [f"a{i}", f"r{i}"]
    return tuple(roles), tuple(names)


def _a(i: int) -> int:
    return 2 * (i - 1)


def _r(i: int) -> int:
    return 2 * (i - 1) + 1


def _m_groups(j: int, k: int, comp3: str) -> list[tuple[Op, ...]]:
    if j == 0:
        return [(Op(PT, (_r(k), _a(k))),)]
    if j == 1:
        trio = (k, k - 1, k - 2)
        return [
            tuple(Op(PT, (_r(i), _a(i))) for i in trio),
            (Op(RESET_OP, tuple(_r(i) for i in trio)),),
            (_comp3(comp3, [_a(i) for i in trio]),),
        ]
    return (_m_groups(j - 1, k, comp3) + _m_groups(j - 1, k - 1, comp3)
            + _m_groups(j - 1, k - 2, comp3) + [(_comp3(comp3, [_a(k), _a(k - 1), _a(k - 2)]),)])


def m_notation(j: int, k: int) -> str:
    if j == 0:
        return f"M0({k})"
    return f"B{{{j - 1}→{j}}}({k}) M{j - 1}({k - 2}) M{j - 1}({k - 1}) M{j - 1}({k})"


def compile_m(j: int, k: int, n_bits: int | None = None, comp3: str = gates.COMP3_PERM) -> Program:
    """Procedure ``M_j(k)``: cool computation bit ``a_k`` to level ``j``.

    ``M_0(k)`` is one PT from ``r_k``. ``M_1(k)`` is a parallel PT group on
    ``a_k, a_{k-1}, a_{k-2}``, a RESET of the three reset bits and a 3B-Comp.
    Higher levels recurse, running ``M_{j-1}(k)`` first.
    """
    if j < 0 or k < 1:
        raise CompileError(f"need j >= 0 and k >= 1, got j={j}, k={k}")
    if j >= 1 and k < 2 * j + 1:
        raise CompileError(f"M_{j}(k) needs k >= 2j+1 = {2 * j + 1}, got k={k}")
    n_comp = k if n_bits is None else n_bits // 2
    if n_comp < k or (n_bits is not None and n_bits % 2):
        raise CompileError(f"register of {n_bits} bits cannot hold a{k} and r{k}")
    roles, names = _pac1_layout(n_comp)
    return Program(f"M{j}({k})", 2 * n_comp, roles, _m_groups(j, k, comp3), names,
                   (_a(k),), j, m_notation(j, k))


def compile_pac1(j_f: int, comp3: str = gates.COMP3_PERM, restore: bool = False) -> Program:
    """PAC1: ``2J+1`` computation bits, each with its own reset bit, ``4J+2`` bits in all.

    With ``restore`` one more parallel PT and RESET bring every hot
    computation bit back to the reset-bit bias (not counted by the closed forms).
    """
    _check_jf(j_f)
    k = 2 * j_f + 1
    groups = _m_groups(j_f, k, comp3)
    if restore:
        rest = range(1, k)
        groups += [tuple(Op(PT, (_r(i), _a(i))) for i in rest),
                   (Op(RESET_OP, tuple(_r(i) for i in rest)),)]
    roles, names = _pac1_layout(k)
    return Program(f"PAC1(J={j_f})", 2 * k, roles, groups, names, (_a(k),), j_f,
                   m_notation(j_f, k))


def compile_pac1_multi(m: int, j_f: int, comp3: str = gates.COMP3_PERM) -> Program:
    """Cool ``m`` bits to level ``J`` with ``2J + m`` computation bits, one ``M_J`` after another."""
    _check_jf(j_f)
    if m < 1:
        raise CompileError(f"need at least one cooled bit, got m={m}")
    n_comp = 2 * j_f + m
    tops = list(range(n_comp, 2 * j_f, -1))
    groups = [g for k in tops for g in _m_groups(j_f, k, comp3)]
    roles, names = _pac1_layout(n_comp)
    name = f"PAC1(J={j_f})" if m == 1 else f"PAC1(J={j_f},m={m})"
    notation = " ".join(f"M{j_f}({k})" for k in reversed(tops))
    return Program(name, 2 * n_comp, roles, groups, names, tuple(_a(k) for k in tops), j_f,
                   notation if m > 1 else m_notation(j_f, n_comp))


class _Pac2Builder:
    """Line of bits ``a_1 .. a_n`` with ``a_1`` (index 0) the only reset bit."""

    def __init__(self, comp3: str):
        self.comp3 = comp3
        self.groups: list[tuple[Op, ...]] = []
        self.dirty = False

    def reset(self) -> None:
        self.groups.append((Op(RESET_OP, (0,)),))
        self.dirty = False

    def init(self, i: int) -> None:
        # Shuttle a fresh reset-bit value up the line to a_i, then RESET(a_1)
        # since the last hop left a used value there.
        if self.dirty:
            self.reset()
        if i == 1:
            return
        for x in range(1, i):
            self.groups.append((Op(PT, (x - 1, x)),))
        self.reset()

    def p(self, j: int, k: int) -> None:
        if j == 1:
            for i in (k, k - 1, k - 2):
                self.init(i)
        else:
            self.p(j - 1, k)
            self.p(j - 1, k - 1)
            self.p(j - 1, k - 2)
        self.groups.append((_comp3(self.comp3, (k - 1, k - 2, k - 3)),))
        if k == 3:
            self.dirty = True


def compile_pac2(j_f: int, comp3: str = gates.COMP3_PERM) -> Program:
    """PAC2: ``2J`` computation bits and a single reset bit that also computes.

    Level-1 cooling of ``a_k`` initiates ``a_k, a_{k-1}, a_{k-2}`` in turn by
    PT chains from the reset bit, each chain followed by a RESET, then
    compresses; higher levels recurse exactly as ``M_j``.
    """
    _check_jf(j_f)
    n = 2 * j_f + 1
    b = _Pac2Builder(comp3)
    b.p(j_f, n)
    roles = (RESET,) + (COMPUTATION,) * (n - 1)
    names = ("r",) + tuple(f"a{i}" for i in range(2, n + 1))
    return Program(f"PAC2(J={j_f})", n, roles, b.groups, names, (n - 1,), j_f,
                   f"P{j_f}({n})")


def compile_demo(comp3: str = gates.COMP3_PERM) -> Program:
    """Three computation bits ``A, B, C`` with reset partners: 3B-Comp, PT back, RESET."""
    # C = a1, B = a2, A = a3 in the PAC1 layout.
    A, B, C = _a(3), _a(2), _a(1)
    rA, rB, rC = _r(3), _r(2), _r(1)
    groups = [
        (_comp3(comp3, (A, B, C)),),
        (Op(PT, (rB, B)), Op(PT, (rC, C))),
        (Op(RESET_OP, (rB, rC)),),
    ]
    roles, _ = _pac1_layout(3)
    names = ("C", "rC", "B", "rB", "A", "rA")
    return Program("demo", 6, roles, groups, names, (A,), 1,
                   "3B-Comp(A;B;C) PT(rB→B),PT(rC→C) RESET(rB,rC)")


def level_discipline(program: Program, uniform_start: bool = False) -> list[str]:
    """Static check that every 3B-Comp acts on three bits of one purification level.

    Levels are tracked symbolically: a PT from a freshly reset bit gives level
    0, a 3B-Comp raises its first operand one level and leaves the other two
    at no level. Returns a list of problems (empty when the program is clean).
    """
    start = 0 if uniform_start else None
    level: list = [0 if r == RESET else start for r in program.roles]
    problems = []
    for gi, group in enumerate(program.groups):
        for op in group:
            if op.kind == PT:
                s, d = op.bits
                level[s], level[d] = level[d], level[s]
            elif op.kind == RESET_OP:
                for b in op.bits:
                    level[b] = 0
            elif op.kind == WAIT:
                level = [0 if program.roles[i] == RESET else None for i in range(program.n_bits)]
            elif op.kind in COMP3_KINDS:
                lv = [level[b] for b in op.bits]
                if lv[0] is None or len(set(lv)) != 1:
                    problems.append(f"group {gi}: {program.format_op(op)} on levels {lv}")
                    level[op.bits[0]] = None
                else:
                    level[op.bits[0]] = lv[0] + 1
                level[op.bits[1]] = level[op.bits[2]] = None
            else:
                for b in op.bits:
                    level[b] = None
    return problems
