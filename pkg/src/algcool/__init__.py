"""Exact simulation and program compilation for algorithmic cooling of spin registers."""

from .thermo import (
    bias_from_temperature,
    temperature_from_bias,
    entropy_of_bias,
    shannon_bound_bias,
    shannon_entropy_floor,
)
from .state import DiagonalState, BiasTracker, ThermalConfig, COMPUTATION, RESET
from .programs import (
    Op,
    Program,
    compile_m,
    compile_pac1,
    compile_pac1_multi,
    compile_pac2,
    compile_demo,
    closed_form_costs,
    block_reference_costs,
)
from .analysis import run, check_shannon, comparison_tables, sweep

__version__ = "0.1.0"
