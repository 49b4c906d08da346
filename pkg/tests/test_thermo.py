import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from algcool import thermo


def test_bias_temperature_round_trip():
    de = thermo.energy_gap(2.0, 3.0)
    assert de == 12.0
    eps = thermo.bias_from_temperature(de, 100.0)
    assert eps == pytest.approx(math.tanh(0.06))
    assert thermo.temperature_from_bias(de, eps) == pytest.approx(100.0)


@pytest.mark.parametrize("bias, expected", [(0.0, 1.0), (1.0, 0.0), (-1.0, 0.0)])
def test_entropy_endpoints(bias, expected):
    assert thermo.entropy_of_bias(bias) == pytest.approx(expected, abs=1e-15)


def test_entropy_of_half_bias():
    # P = 0.75 / 0.25
    want = -(0.75 * math.log2(0.75) + 0.25 * math.log2(0.25))
    assert thermo.entropy_of_bias(0.5) == pytest.approx(want, rel=1e-14)


@given(st.floats(-1, 1))
def test_entropy_is_even_and_bounded(eps):
    h = thermo.entropy_of_bias(eps)
    assert 0.0 <= h <= 1.0
    assert h == pytest.approx(thermo.entropy_of_bias(-eps), abs=1e-15)


@given(st.floats(-0.05, 0.05))
def test_small_bias_approximation(eps):
    exact = thermo.entropy_of_bias(eps)
    approx = thermo.entropy_of_bias_approx(eps)
    assert abs(exact - approx) <= eps**4 + 1e-15


def test_shannon_bound_and_floor():
    assert thermo.shannon_bound_bias(7, 0.01) == pytest.approx(0.01 * math.sqrt(7))
    assert thermo.shannon_bound_bias(10_000, 0.5) == 1.0
    assert thermo.shannon_entropy_floor(4, 0.1) == pytest.approx(1 - 4 * 0.01 / math.log(4))


@pytest.mark.parametrize("m, n", [(5, 25), (25, 625), (1.5, 3), (2, 4)])
def test_rpc_spin_count(m, n):
    assert thermo.rpc_spins_for_gain(m) == n


@pytest.mark.parametrize("call", [
    lambda: thermo.entropy_of_bias(1.5),
    lambda: thermo.bias_from_temperature(1.0, 0.0),
    lambda: thermo.shannon_bound_bias(0, 0.1),
    lambda: thermo.rpc_spins_for_gain(0),
])
def test_domain_errors(call):
    with pytest.raises(ValueError):
        call()
