"""
LangGraph workflow wiring the oracle-gate checks.
"""

from .workflow import build_gate_workflow, run_oracle_gate

__all__ = ["build_gate_workflow", "run_oracle_gate"]
