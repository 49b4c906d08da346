"""Gate set for cooling programs, as permutation tables on local bit patterns.

A table for a ``k``-bit gate is a tuple ``t`` of length ``2**k`` with
``t[x] = y`` meaning input pattern ``x`` maps to output pattern ``y``. Patterns
are read in operand order with the first operand most significant, so for a
3-bit gate on ``(A, B, C)`` the pattern ``0b011`` is ``A=0, B=1, C=1``. Bit
value 0 is spin-up.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

CNOT = "CNOT"
CSWAP_VARIANT = "CSWAP_VARIANT"
COMP3_TWO_GATE = "COMP3_TWO_GATE"
COMP3_PERM = "COMP3_PERM"
SWAP = "SWAP"

GATE_KINDS = (CNOT, CSWAP_VARIANT, COMP3_TWO_GATE, COMP3_PERM, SWAP)
ARITY = {CNOT: 2, SWAP: 2, CSWAP_VARIANT: 3, COMP3_TWO_GATE: 3, COMP3_PERM: 3}


def _bits(x: int, k: int) -> tuple[int, ...]:
    return tuple((x >> (k - 1 - i)) & 1 for i in range(k))


def _pattern(bits) -> int:
    x = 0
    for b in bits:
        x = (x << 1) | b
    return x


def _from_rule(k: int, rule) -> tuple[int, ...]:
    return tuple(_pattern(rule(*_bits(x, k))) for x in range(2**k))


def is_bijection(table) -> bool:
    return sorted(table) == list(range(len(table))) and len(table).bit_count() == 1


def compose(first, second) -> tuple[int, ...]:
    """Table for applying ``first`` and then ``second`` on the same operands."""
    return tuple(second[first[x]] for x in range(len(first)))


def inverse(table) -> tuple[int, ...]:
    inv = [0] * len(table)
    for x, y in enumerate(table):
        inv[y] = x
    return tuple(inv)


@lru_cache(maxsize=None)
def cnot_table() -> tuple[int, ...]:
    """CNOT on ``(control, target)``: ``(C, B) -> (C, B xor C)``."""
    return _from_rule(2, lambda c, b: (c, b ^ c))


@lru_cache(maxsize=None)
def cswap_variant_table() -> tuple[int, ...]:
    """``(A, B, C) -> (C, B, A)`` when ``B = 0``; identity when ``B = 1``."""
    return _from_rule(3, lambda a, b, c: (c, b, a) if b == 0 else (a, b, c))


@lru_cache(maxsize=None)
def comp3_two_gate_table() -> tuple[int, ...]:
    """3B-Comp as CNOT(C -> B) followed by the B-controlled swap of A and C."""
    cnot_cb = _from_rule(3, lambda a, b, c: (a, b ^ c, c))
    return compose(cnot_cb, cswap_variant_table())


@lru_cache(maxsize=None)
def comp3_perm_table() -> tuple[int, ...]:
    """Single-permutation 3B-Comp: identity except ``011 <-> 100``."""
    table = list(range(8))
    table[0b011], table[0b100] = 0b100, 0b011
    return tuple(table)


@lru_cache(maxsize=None)
def pt_swap_table() -> tuple[int, ...]:
    """Polarization transfer as a SWAP: ``(X, r) -> (r, X)``."""
    return _from_rule(2, lambda x, r: (r, x))


TABLES = {
    CNOT: cnot_table,
    CSWAP_VARIANT: cswap_variant_table,
    COMP3_TWO_GATE: comp3_two_gate_table,
    COMP3_PERM: comp3_perm_table,
    SWAP: pt_swap_table,
}


@dataclass(frozen=True)
class GateSpec:
    kind: str
    operands: tuple[int, ...]

    def __post_init__(self):
        if self.kind not in ARITY:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "operands", tuple(int(b) for b in self.operands))
        if len(self.operands) != ARITY[self.kind]:
            raise ValueError(
                f"{self.kind} takes {ARITY[self.kind]} operands, got {len(self.operands)}"
            )
        if len(set(self.operands)) != len(self.operands):
            raise ValueError(f"repeated operand in {self.kind}{self.operands}")

    def table(self) -> tuple[int, ...]:
        return TABLES[self.kind]()


def predicted_comp3_bias(eps: float) -> float:
    """Cooled-bit bias after 3B-Comp on three independent bits of bias ``eps``."""
    if abs(eps) > 1:
        raise ValueError(f"bias must lie in [-1, 1], got {eps!r}")
    return (3.0 * eps - eps**3) / 2.0


def comp3_marginals(eps: float, kind: str = COMP3_PERM) -> tuple[float, float, float]:
    """Closed-form ``(A, B, C)`` biases after 3B-Comp on three equal independent bits.

    The two constructions agree on ``A`` but leave the heated bits differently.
    """
    cooled = predicted_comp3_bias(eps)
    heated = (eps + eps**3) / 2.0
    if kind == COMP3_PERM:
        return cooled, heated, heated
    if kind == COMP3_TWO_GATE:
        return cooled, eps * eps, heated
    raise ValueError(f"no closed form for {kind!r}")


def marginals_after(table, biases) -> list[float]:
    """Exact operand biases after ``table`` acts on independent bits with ``biases``."""
    k = len(biases)
    out = [0.0] * k
    for x in range(2**k):
        w = 1.0
        for b, eps in zip(_bits(x, k), biases):
            w *= (1.0 + eps) / 2.0 if b == 0 else (1.0 - eps) / 2.0
        for i, b in enumerate(_bits(table[x], k)):
            out[i] += w if b == 0 else -w
    return out


def format_truth_table(table, labels: str | None = None) -> str:
    """Render a table as ``input -> output`` rows, one per pattern."""
    k = len(table).bit_length() - 1
    if labels is None:
        labels = "ABCDEFGH"[:k]
    lines = [f"input:{labels} -> output:{labels}"]
    for x in range(len(table)):
        lines.append(f"{x:0{k}b} -> {table[x]:0{k}b}")
    return "\n".join(lines) + "\n"
