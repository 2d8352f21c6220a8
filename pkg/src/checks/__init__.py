"""
Oracle-gate checks. Importing a check module registers it with ``CheckRegistry``.
"""

from .beta_equivalence_check import run_beta_equivalence_check
from .gamma_gate_check import run_gamma_gate_check
from .generating_function_check import run_generating_function_check
from .mass_identity_check import run_mass_identity_check
from .supervisor import GateState, decide_next_node, initialize_state, supervisor_node

__all__ = [
    "GateState",
    "initialize_state",
    "supervisor_node",
    "decide_next_node",
    "run_mass_identity_check",
    "run_generating_function_check",
    "run_beta_equivalence_check",
    "run_gamma_gate_check",
]
