from __future__ import annotations

import logging

from langgraph.graph import END, StateGraph

from src import __version__
from src.checks import (
    GateState,
    decide_next_node,
    run_beta_equivalence_check,
    run_gamma_gate_check,
    run_generating_function_check,
    run_mass_identity_check,
    supervisor_node,
)
from src.framework.check_registry import CheckRegistry
from src.schemas.report_schema import GateReport

logger = logging.getLogger(__name__)

CHECK_NODES = {
    "mass_identity": run_mass_identity_check,
    "generating_function": run_generating_function_check,
    "beta_equivalence": run_beta_equivalence_check,
    "gamma_gate": run_gamma_gate_check,
}


def build_gate_workflow():
    """Build the oracle-gate supervisor graph; every check hands control back to the supervisor."""
    graph = StateGraph(GateState)

    graph.add_node("supervisor", supervisor_node)
    for check in CheckRegistry.get_all_checks():
        graph.add_node(check["name"], CHECK_NODES[check["name"]])

    graph.set_entry_point("supervisor")

    routes = {name: name for name in CHECK_NODES}
    routes["end"] = END
    graph.add_conditional_edges("supervisor", decide_next_node, routes)

    for name in CHECK_NODES:
        graph.add_edge(name, "supervisor")

    return graph.compile()


def run_oracle_gate(state: GateState) -> GateReport:
    """Invoke the gate and fold per-check results into a report in gate order."""
    app = build_gate_workflow()
    final_state: GateState = app.invoke(state)
    results = final_state.get("results", {})
    ordered = [results[c["name"]] for c in CheckRegistry.get_all_checks() if c["name"] in results]
    report = GateReport(
        ensemble=state["ensemble_label"],
        t_max=state["t_max"],
        passed=bool(ordered) and all(r.passed for r in ordered),
        checks=ordered,
        tool_version=__version__,
    )
    logger.info("[oracle_gate] Gate %s (%d checks)", "PASSED" if report.passed else "FAILED", len(ordered))
    return report


__all__ = ["build_gate_workflow", "run_oracle_gate", "CHECK_NODES"]
