from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from algcool import gates
from algcool import programs as P

import oracle

GOLDEN = Path(__file__).parent / "golden"


@pytest.mark.parametrize("j", range(1, 9))
def test_pac1_counts_follow_closed_form(j):
    c = P.compile_pac1(j).cost
    assert c.total_time_steps == (5 * 3 ** (j - 1) - 1) // 2
    assert c.reset_steps == 3 ** (j - 1)
    assert c.total_time_steps == P.time_steps_recurrence(j)


@pytest.mark.parametrize("j, cost", [(1, (4, 1, 2)), (2, (13, 3, 7)), (3, (40, 9, 22))])
def test_pac1_costs_frozen(j, cost):
    c = P.compile_pac1(j).cost
    assert (c.compute_steps, c.reset_steps, c.total_time_steps) == cost


@pytest.mark.parametrize("j, cost", [(1, (4, 2, 4)), (2, (22, 8, 22)), (3, (94, 26, 94))])
def test_pac2_costs_frozen(j, cost):
    # counted from the compiled schedule; eager reset after each transfer chain
    c = P.compile_pac2(j).cost
    assert (c.compute_steps, c.reset_steps, c.total_time_steps) == cost


@pytest.mark.parametrize("j", [1, 2, 3, 4])
def test_register_sizes(j):
    assert P.compile_pac1(j).n_bits == 4 * j + 2
    assert P.compile_pac2(j).n_bits == 2 * j + 1
    assert P.compile_pac2(j).roles.count("reset") == 1


def test_level_bias_iterates_comp3():
    assert P.level_bias(0.01, 0) == 0.01
    assert P.level_bias(0.01, 2) == pytest.approx(0.0224975627, abs=1e-10)
    assert P.level_bias(0.01, 3) == pytest.approx(oracle.iterate_level(0.01, 3), abs=1e-16)


@pytest.mark.parametrize("m, j", [(5, 4), (25, 8), (1.5, 1), (2.25, 2)])
def test_levels_for_gain(m, j):
    assert P.levels_for_gain(m) == j


def test_closed_forms_and_reference_costs():
    cf = P.closed_form_costs(3)
    assert cf["time_steps"] == 22 and cf["reset_steps"] == 9
    assert cf["pac1_bits"] == 14 and cf["pac2_bits"] == 7
    assert P.block_reference_costs(3, 20)["bits_approx"] == 140
    assert P.block_reference_costs(4, 20)["time_bound"] == 1_250_000


@pytest.mark.parametrize("j", [1, 2, 3])
@pytest.mark.parametrize("compile_", [P.compile_pac1, P.compile_pac2])
@pytest.mark.parametrize("eps0", [0.01, 0.1])
def test_oracle_execution_reaches_level(j, compile_, eps0):
    prog = compile_(j)
    dist = oracle.execute(prog, eps0)
    assert oracle.bias(dist, prog.target) == pytest.approx(oracle.iterate_level(eps0, j), abs=1e-12)


@pytest.mark.parametrize("comp3", [gates.COMP3_PERM, gates.COMP3_TWO_GATE])
def test_two_gate_form_reaches_same_level(comp3):
    prog = P.compile_pac2(2, comp3)
    dist = oracle.execute(prog, 0.1)
    assert oracle.bias(dist, prog.target) == pytest.approx(oracle.iterate_level(0.1, 2), abs=1e-12)


def test_two_gate_costs_two_time_steps():
    a = P.compile_pac1(2, gates.COMP3_PERM).cost
    b = P.compile_pac1(2, gates.COMP3_TWO_GATE).cost
    assert b.compute_steps == a.compute_steps
    assert b.total_time_steps > a.total_time_steps


def test_m_notation_and_schedule():
    prog = P.compile_m(1, 3)
    assert prog.notation == "B{0→1}(3) M0(1) M0(2) M0(3)"
    assert P.m_notation(2, 5) == "B{1→2}(5) M1(3) M1(4) M1(5)"
    assert prog.to_jsonl() == (GOLDEN / "m1_k3.program.jsonl").read_text()
    with pytest.raises(P.CompileError):
        P.compile_m(2, 4)


def test_pac2_listing_golden():
    assert P.compile_pac2(2).listing() == (GOLDEN / "pac2_j2.listing.txt").read_text()


def test_pac2_j1_schedule():
    lines = [l.split(None, 1)[1] for l in P.compile_pac2(1).listing().splitlines()]
    assert lines == ["PT(r→a2)", "PT(a2→a3)", "RESET(r)", "PT(r→a2)", "RESET(r)", "3B-Comp(a3;a2;r)"]


def test_demo_demo_shape():
    prog = P.compile_demo()
    assert prog.names == ("C", "rC", "B", "rB", "A", "rA")
    assert [len(g) for g in prog.groups] == [1, 2, 1]
    assert prog.groups[0][0].bits == (4, 2, 0)


@pytest.mark.parametrize("prog", [P.compile_pac1(2), P.compile_pac2(3), P.compile_demo(),
                                  P.compile_pac1_multi(3, 1), P.compile_pac1(2, restore=True)])
def test_jsonl_round_trip(prog):
    back = P.Program.from_jsonl(prog.to_jsonl())
    assert back.groups == prog.groups
    assert back.cost == prog.cost
    assert back.names == prog.names


def test_level_discipline_holds():
    for prog in (P.compile_pac1(3), P.compile_pac2(3), P.compile_pac1_multi(2, 2)):
        assert P.level_discipline(prog) == []


def test_multi_cooled_bits():
    prog = P.compile_pac1_multi(3, 1)
    assert len(prog.targets) == 3
    dist = oracle.execute(prog, 0.1)
    for t in prog.targets:
        assert oracle.bias(dist, t) == pytest.approx(oracle.iterate_level(0.1, 1), abs=1e-12)


def test_validation_rejects_bad_programs():
    rs = ("reset", "reset", "reset")
    with pytest.raises(ValueError):
        P.Program("x", 3, rs, [(P.Op(P.PT, (0, 1)), P.Op(P.PT, (1, 2)))])
    with pytest.raises(ValueError):
        P.Program("x", 3, rs, [(P.Op(P.PT, (0, 5)),)])
    with pytest.raises(ValueError):
        P.Program("x", 3, rs, [(P.Op(P.PT, (0, 1)), P.Op(P.RESET_OP, (2,)))])
    with pytest.raises(ValueError):
        P.Op(P.PERM, (0, 1), table=(0, 0, 1, 2))
    with pytest.raises(ValueError):
        P.Op(P.WAIT, duration=-1.0)
    with pytest.raises(P.CompileError):
        P.compile_pac1(0)


@given(st.integers(1, 4))
def test_program_is_closed_only_without_resets(j):
    assert not P.compile_pac2(j).closed
    prog = P.Program("perm", 3, ("computation",) * 3, [(P.Op(gates.COMP3_PERM, (0, 1, 2)),)])
    assert prog.closed
