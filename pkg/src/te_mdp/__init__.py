"""Policy synthesis for labeled MDPs trading transfer entropy against mission failure."""

__version__ = "0.1.0"

from .dfa import Dfa, accepts_prefix, to_dfa
from .ltl import parse
from .mdp import LabeledMdp, StateSpace, step_distribution, validate
from .product import ProductMdp, build_product, value_iteration_reach
from .solver import (
    PolicyTable,
    SolveReport,
    SolverConfig,
    SolverState,
    backward_pass,
    expected_cost,
    forward_pass,
    objective,
    solve,
    solve_constrained,
    static_gibbs,
    transfer_entropy,
)

__all__ = [
    "Dfa", "accepts_prefix", "to_dfa", "parse", "LabeledMdp", "StateSpace", "step_distribution",
    "validate", "ProductMdp", "build_product", "value_iteration_reach", "PolicyTable", "SolveReport",
    "SolverConfig", "SolverState", "backward_pass", "expected_cost", "forward_pass", "objective",
    "solve", "solve_constrained", "static_gibbs", "transfer_entropy",
]
