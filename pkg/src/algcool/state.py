"""Exact classical state of an n-bit spin register and a cheap per-bit bias tracker.

Register bit ``i`` is bit ``i`` of the basis index (bit 0 least significant,
the rightmost spin ``a_1`` of the register). Bit value 0 is spin-up, so the
bias of a bit is ``P(bit=0) - P(bit=1)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import gates
from .thermo import bias_from_temperature

COMPUTATION = "computation"
RESET = "reset"
ROLES = (COMPUTATION, RESET)

DEFAULT_MAX_BITS = 24
_NEG_TOL = 1e-15
_NORM_TOL = 1e-12


class RepresentationCapError(ValueError):
    """The register is too large for the dense distribution."""


class ResetPolicyError(ValueError):
    """A RESET targeted a computation bit without an explicit override."""


def _check_bias(eps: float) -> float:
    eps = float(eps)
    if not -1.0 <= eps <= 1.0:
        raise ValueError(f"bias must lie in [-1, 1], got {eps!r}")
    return eps


def _bit_dist(eps: float) -> np.ndarray:
    return np.array([(1.0 + eps) / 2.0, (1.0 - eps) / 2.0])


def _entropy(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


@dataclass(frozen=True)
class ThermalConfig:
    """Equilibrium biases and relaxation times for the two bit roles.

    ``eps0`` is the reset-bit equilibrium bias; computation bits use
    ``eps_comp`` (defaults to ``eps0``). Times share one arbitrary unit.
    ``compute_duration`` is the wall time of one gate/PT group and
    ``reset_duration`` the wait of one RESET group; both only matter in
    finite mode.
    """

    eps0: float = 0.01
    eps_comp: float | None = None
    t1_comp: float = math.inf
    t1_reset: float = 1.0
    compute_duration: float = 1.0
    reset_duration: float = 5.0

    def __post_init__(self):
        _check_bias(self.eps0)
        if self.eps_comp is not None:
            _check_bias(self.eps_comp)
        if self.t1_comp <= 0 or self.t1_reset <= 0:
            raise ValueError("relaxation times must be positive")
        if self.compute_duration < 0 or self.reset_duration < 0:
            raise ValueError("step durations must be non-negative")

    @classmethod
    def from_ratio(cls, eps0: float, r_relax: float, *, t1_reset: float = 1.0, **kw) -> "ThermalConfig":
        """Config with ``t1_comp = r_relax * t1_reset``."""
        return cls(eps0=eps0, t1_comp=r_relax * t1_reset, t1_reset=t1_reset, **kw)

    @classmethod
    def from_temperature(cls, delta_e: float, temperature: float, **kw) -> "ThermalConfig":
        return cls(eps0=bias_from_temperature(delta_e, temperature), **kw)

    @property
    def r_relax(self) -> float:
        return self.t1_comp / self.t1_reset

    def equilibrium(self, role: str) -> float:
        if role == RESET or self.eps_comp is None:
            return self.eps0
        return self.eps_comp

    def t1(self, role: str) -> float:
        return self.t1_reset if role == RESET else self.t1_comp

    def equilibrium_biases(self, roles: Sequence[str]) -> list[float]:
        return [self.equilibrium(r) for r in roles]


def _relax_weight(duration: float, t1: float) -> float:
    """Probability that a bit is replaced by a thermal one during ``duration``."""
    if duration < 0:
        raise ValueError(f"duration must be non-negative, got {duration!r}")
    if duration == 0 or math.isinf(t1):
        return 0.0
    if math.isinf(duration):
        return 1.0
    return -math.expm1(-duration / t1)


@dataclass(frozen=True, eq=False)
class DiagonalState:
    """Probability distribution over the ``2**n_bits`` basis states of a register."""

    n_bits: int
    probs: np.ndarray
    roles: tuple[str, ...]
    max_bits: int = field(default=DEFAULT_MAX_BITS, repr=False)

    def __post_init__(self):
        if self.n_bits < 1:
            raise ValueError("register needs at least one bit")
        if self.n_bits > self.max_bits:
            raise RepresentationCapError(
                f"{self.n_bits} bits exceeds the dense cap of {self.max_bits}; use a tracker-only run"
            )
        roles = tuple(self.roles)
        if len(roles) != self.n_bits or any(r not in ROLES for r in roles):
            raise ValueError(f"need one role from {ROLES} per bit, got {roles!r}")
        probs = np.asarray(self.probs, dtype=float)
        if probs.shape != (2**self.n_bits,):
            raise ValueError(f"expected {2**self.n_bits} probabilities, got shape {probs.shape}")
        if probs.min() < -_NEG_TOL:
            raise ValueError(f"negative probability {probs.min()!r}")
        probs = np.where(probs < 0, 0.0, probs)
        if abs(probs.sum() - 1.0) > _NORM_TOL:
            raise ValueError(f"probabilities sum to {probs.sum()!r}")
        probs.setflags(write=False)
        object.__setattr__(self, "roles", roles)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def new_thermal(cls, biases: Sequence[float], roles: Sequence[str] | None = None,
                    max_bits: int = DEFAULT_MAX_BITS) -> "DiagonalState":
        """Product of independent bits with the given biases."""
        biases = [_check_bias(e) for e in biases]
        n = len(biases)
        if n > max_bits:
            raise RepresentationCapError(
                f"{n} bits exceeds the dense cap of {max_bits}; use a tracker-only run"
            )
        if roles is None:
            roles = (COMPUTATION,) * n
        probs = np.ones(1)
        for eps in biases:
            probs = np.kron(_bit_dist(eps), probs)
        return cls(n, probs, tuple(roles), max_bits)

    def _replace(self, probs: np.ndarray) -> "DiagonalState":
        return DiagonalState(self.n_bits, probs, self.roles, self.max_bits)

    def _tensor(self) -> np.ndarray:
        # C order: axis 0 is the most significant bit.
        return self.probs.reshape((2,) * self.n_bits)

    def _axis(self, bit: int) -> int:
        if not 0 <= bit < self.n_bits:
            raise IndexError(f"bit {bit} out of range for {self.n_bits}-bit register")
        return self.n_bits - 1 - bit

    def marginal(self, bit: int) -> np.ndarray:
        """``(P(bit=0), P(bit=1))``."""
        axis = self._axis(bit)
        others = tuple(a for a in range(self.n_bits) if a != axis)
        return self._tensor().sum(axis=others)

    def marginal_bias(self, bit: int) -> float:
        p0, p1 = self.marginal(bit)
        return float(p0 - p1)

    def biases(self) -> list[float]:
        return [self.marginal_bias(i) for i in range(self.n_bits)]

    def joint_marginal(self, bits: Sequence[int]) -> np.ndarray:
        """Joint distribution of ``bits``, axes in the given order."""
        axes = [self._axis(b) for b in bits]
        if len(set(axes)) != len(axes):
            raise ValueError("repeated bit")
        others = tuple(a for a in range(self.n_bits) if a not in axes)
        t = self._tensor().sum(axis=others)
        kept = sorted(axes)
        return np.transpose(t, [kept.index(a) for a in axes])

    def apply_permutation(self, table: Sequence[int], bits: Sequence[int]) -> "DiagonalState":
        """Relabel basis states by a permutation of the operand bit patterns.

        ``bits[0]`` is the most significant bit of the local pattern.
        """
        k = len(bits)
        if len(table) != 2**k or not gates.is_bijection(table):
            raise ValueError(f"table is not a bijection on {k}-bit patterns")
        axes = [self._axis(b) for b in bits]
        if len(set(axes)) != k:
            raise ValueError(f"repeated operand in {tuple(bits)}")
        rest = [a for a in range(self.n_bits) if a not in axes]
        t = np.transpose(self._tensor(), axes + rest).reshape(2**k, -1)
        moved = t[np.asarray(gates.inverse(table))]
        moved = moved.reshape((2,) * self.n_bits)
        back = np.argsort(axes + rest)
        return self._replace(np.transpose(moved, back).reshape(-1))

    def apply_reset(self, bit: int, equilibrium_bias: float, override: bool = False) -> "DiagonalState":
        """Replace ``bit`` with a fresh independent thermal bit."""
        if self.roles[bit] != RESET and not override:
            raise ResetPolicyError(f"bit {bit} is a {self.roles[bit]} bit; pass override=True to reset it")
        return self._replace_bit(bit, _check_bias(equilibrium_bias), 1.0)

    def _replace_bit(self, bit: int, eps: float, weight: float) -> "DiagonalState":
        if weight == 0.0:
            return self
        axis = self._axis(bit)
        t = self._tensor()
        rest = t.sum(axis=axis, keepdims=True)
        shape = [1] * self.n_bits
        shape[axis] = 2
        fresh = rest * _bit_dist(eps).reshape(shape)
        new = fresh if weight == 1.0 else (1.0 - weight) * t + weight * fresh
        return self._replace(new.reshape(-1))

    def relax(self, duration: float, config: ThermalConfig) -> "DiagonalState":
        """Independent per-bit replacement toward equilibrium at rate ``1/T1``."""
        if duration < 0:
            raise ValueError(f"duration must be non-negative, got {duration!r}")
        state = self
        for bit, role in enumerate(self.roles):
            w = _relax_weight(duration, config.t1(role))
            state = state._replace_bit(bit, config.equilibrium(role), w)
        return state

    def total_entropy(self) -> float:
        return _entropy(self.probs)

    def single_bit_entropy(self, bit: int) -> float:
        return _entropy(self.marginal(bit))

    def mutual_information(self, a: int, b: int) -> float:
        joint = self.joint_marginal([a, b])
        return self.single_bit_entropy(a) + self.single_bit_entropy(b) - _entropy(joint.reshape(-1))

    def to_json(self) -> str:
        """``{n_bits, roles, probs}`` with ``probs[i]`` for basis index ``i`` (little-endian bits)."""
        return json.dumps(
            {"n_bits": self.n_bits, "roles": list(self.roles), "probs": [float(p) for p in self.probs]}
        )

    @classmethod
    def from_json(cls, text: str, max_bits: int = DEFAULT_MAX_BITS) -> "DiagonalState":
        d = json.loads(text)
        return cls(int(d["n_bits"]), np.array(d["probs"], dtype=float), tuple(d["roles"]), max_bits)


class BiasTracker:
    """Per-bit biases updated analytically, exact while operands stay independent.

    Bits are partitioned into groups such that the register distribution is a
    product over groups. A multi-bit gate whose operands sit in distinct groups
    acts on independent bits, so its output marginals follow from enumerating
    the local patterns; the operands' groups then merge. A RESET detaches its
    bit into a fresh group. A gate on two bits of one group clears
    ``independence_valid``.
    """

    def __init__(self, biases: Sequence[float], roles: Sequence[str] | None = None):
        self.biases = [_check_bias(e) for e in biases]
        self.n_bits = len(self.biases)
        self.roles = tuple(roles) if roles is not None else (COMPUTATION,) * self.n_bits
        self.independence_valid = True
        self._group = list(range(self.n_bits))
        self._next_group = self.n_bits

    def copy(self) -> "BiasTracker":
        t = BiasTracker.__new__(BiasTracker)
        t.biases = list(self.biases)
        t.n_bits = self.n_bits
        t.roles = self.roles
        t.independence_valid = self.independence_valid
        t._group = list(self._group)
        t._next_group = self._next_group
        return t

    def independent(self, bits: Sequence[int]) -> bool:
        groups = [self._group[b] for b in bits]
        return len(set(groups)) == len(groups)

    def swap(self, a: int, b: int) -> "BiasTracker":
        t = self.copy()
        t.biases[a], t.biases[b] = t.biases[b], t.biases[a]
        t._group[a], t._group[b] = t._group[b], t._group[a]
        return t

    def permute(self, table: Sequence[int], bits: Sequence[int]) -> "BiasTracker":
        if tuple(table) == gates.pt_swap_table():
            return self.swap(*bits)
        t = self.copy()
        if not self.independent(bits):
            t.independence_valid = False
        new = gates.marginals_after(table, [self.biases[b] for b in bits])
        for b, eps in zip(bits, new):
            t.biases[b] = max(-1.0, min(1.0, eps))
        merged = t._group[bits[0]]
        old = {t._group[b] for b in bits}
        t._group = [merged if g in old else g for g in t._group]
        return t

    def reset(self, bit: int, equilibrium_bias: float) -> "BiasTracker":
        t = self.copy()
        t.biases[bit] = _check_bias(equilibrium_bias)
        t._group[bit] = t._next_group
        t._next_group += 1
        return t

    def relax(self, duration: float, config: ThermalConfig) -> "BiasTracker":
        t = self.copy()
        for bit, role in enumerate(self.roles):
            w = _relax_weight(duration, config.t1(role))
            eq = config.equilibrium(role)
            t.biases[bit] = eq + (t.biases[bit] - eq) * (1.0 - w)
        return t

    def apply(self, op, config: ThermalConfig | None = None) -> "BiasTracker":
        """Apply one program op (ideal semantics: RESET is exact, WAIT relaxes)."""
        config = config or ThermalConfig()
        if op.kind == "PT":
            return self.swap(*op.bits)
        if op.kind == "RESET":
            t = self
            for b in op.bits:
                t = t.reset(b, config.equilibrium(self.roles[b]))
            return t
        if op.kind == "WAIT":
            return self.relax(op.duration, config)
        return self.permute(op.permutation(), op.bits)


def tracker_apply(tracker: BiasTracker, op, config: ThermalConfig | None = None) -> BiasTracker:
    return tracker.apply(op, config)
