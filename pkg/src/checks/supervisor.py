from __future__ import annotations

import logging
from typing import Dict, List, Optional, TypedDict

from src.framework.check_registry import CheckRegistry
from src.schemas.ensemble_schema import EnsembleSpec
from src.schemas.report_schema import CheckResult

logger = logging.getLogger(__name__)

DEFAULT_BETA_EPSILONS = [round(0.1 * k, 1) for k in range(1, 10)]
DEFAULT_GAMMA_EPSILONS = [0.3, 0.6]
DEFAULT_GAMMA_GRAPHS = 2000


class GateState(TypedDict, total=False):
    """Oracle-gate workflow state."""
    ensemble: EnsembleSpec
    ensemble_label: str
    t_max: int
    epsilons: List[float]
    gamma_epsilons: List[float]
    gamma_n_list: Optional[List[int]]
    gamma_graphs: int
    seed: int
    workers: int
    selected_checks: Optional[List[str]]
    results: Dict[str, CheckResult]


def initialize_state(
    ensemble: EnsembleSpec,
    t_max: int,
    *,
    ensemble_label: Optional[str] = None,
    epsilons: Optional[List[float]] = None,
    gamma_epsilons: Optional[List[float]] = None,
    gamma_n_list: Optional[List[int]] = None,
    gamma_graphs: int = DEFAULT_GAMMA_GRAPHS,
    seed: int = 0,
    workers: int = 1,
    selected_checks: Optional[List[str]] = None,
) -> GateState:
    """Initialize gate state from CLI input."""
    return GateState(
        ensemble=ensemble,
        ensemble_label=ensemble_label or ensemble.name or "ensemble",
        t_max=t_max,
        epsilons=epsilons or list(DEFAULT_BETA_EPSILONS),
        gamma_epsilons=gamma_epsilons or list(DEFAULT_GAMMA_EPSILONS),
        gamma_n_list=gamma_n_list,
        gamma_graphs=gamma_graphs,
        seed=seed,
        workers=workers,
        selected_checks=selected_checks,
        results={},
    )


def supervisor_node(state: GateState) -> GateState:
    """Pass-through node for logging."""
    logger.info("[oracle_gate] Supervisor visited. Done: %s", sorted(state.get("results", {})))
    return state


def pending_checks(state: GateState) -> List[str]:
    done = state.get("results", {})
    selected = state.get("selected_checks")
    return [
        check["name"]
        for check in CheckRegistry.get_all_checks()
        if check["name"] not in done and (selected is None or check["name"] in selected)
    ]


def decide_next_node(state: GateState) -> str:
    """Route to the first registered check that has not run yet."""
    pending = pending_checks(state)
    decision = pending[0] if pending else "end"
    logger.info("[oracle_gate] Routing -> %s", decision)
    return decision


def record(state: GateState, result: CheckResult) -> GateState:
    results = dict(state.get("results", {}))
    results[result.name] = result
    level = logging.INFO if result.passed else logging.ERROR
    logger.log(
        level,
        "[oracle_gate] %s: %s (%d cases, max deviation %.3g)",
        result.name, "PASS" if result.passed else "FAIL", result.cases, result.max_deviation,
    )
    return {"results": results}


__all__ = [
    "GateState",
    "initialize_state",
    "supervisor_node",
    "pending_checks",
    "decide_next_node",
    "record",
]
