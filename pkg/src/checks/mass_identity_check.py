"""Mass identity check: probabilities on enumerated trees against density evolution."""

from __future__ import annotations

import logging
import math
from typing import Dict, List

from src.checks.supervisor import GateState, record
from src.framework.check_registry import CheckRegistry
from src.framework.errors import AnalysisError
from src.schemas.report_schema import CheckResult
from src.tools.density_evolution_tools import de_trajectory
from src.tools.oracle_tools import (
    MAX_ENUMERATION_DEPTH,
    beta_coefficient,
    enumerate_trees,
    finite_size_ratio,
    mixture_pb,
    pn_of_graph,
    single_cycle_graph,
    tree_mass,
)

logger = logging.getLogger(__name__)

MASS_TOLERANCE = 1e-12
LIMIT_RELATIVE_TOLERANCE = 1e-5
LIMIT_BLOCKLENGTHS = (10_000, 100_000)
CYCLE_BLOCKLENGTHS = (10_000, 100_000, 1_000_000)
MAX_LIMIT_GRAPHS = 200

CheckRegistry.register_check(
    name="mass_identity",
    description="Tree mass sums to one, the tree mixture reproduces eps*L(P), and n(P_n/P_inf - 1) has the closed-form limit.",
    order=10,
)


def _limit_deviation(graphs, spec) -> float:
    """Largest relative gap between the Richardson limit of n(P_n/P_inf - 1) and its closed form."""
    n1, n2 = LIMIT_BLOCKLENGTHS
    stride = max(1, len(graphs) // MAX_LIMIT_GRAPHS)
    worst = 0.0
    for g in graphs[::stride]:
        if g.k == 0:
            continue
        r1 = n1 * (finite_size_ratio(g, spec, n1) - 1.0)
        r2 = n2 * (finite_size_ratio(g, spec, n2) - 1.0)
        limit = (n2 * r2 - n1 * r1) / (n2 - n1)
        expected = float(beta_coefficient(g, spec))
        worst = max(worst, abs(limit - expected) / max(1.0, abs(expected)))
    return worst


def _cycle_order_ok(spec) -> bool:
    """n * P_n(G) of a single-cycle graph settles to a positive limit."""
    u = min(spec.L)
    for cycle_checks in (1, 2):
        g = single_cycle_graph(spec, u, cycle_checks)
        scaled = [n * float(pn_of_graph(g, spec, n)) for n in CYCLE_BLOCKLENGTHS]
        if not all(math.isfinite(v) and v > 0 for v in scaled):
            return False
        if abs(scaled[2] - scaled[1]) > abs(scaled[1] - scaled[0]):
            return False
    return True


def run_mass_identity_check(state: GateState) -> GateState:
    spec = state["ensemble"]
    depth = min(state["t_max"], MAX_ENUMERATION_DEPTH)
    logger.info("[mass_identity] Checking t = 0..%d", depth)

    failures: List[str] = []
    deviations: Dict[str, float] = {"mass": 0.0, "mixture": 0.0, "limit": 0.0}
    cases = 0
    try:
        for t in range(depth + 1):
            trees = enumerate_trees(spec, t)
            mass_gap = abs(float(tree_mass(trees, spec, exact=spec.is_exact)) - 1.0)
            deviations["mass"] = max(deviations["mass"], mass_gap)
            cases += 1
            if mass_gap > MASS_TOLERANCE:
                failures.append(f"t={t}: tree mass off by {mass_gap:.3g}")

            for eps in state["epsilons"]:
                expected = de_trajectory(spec, eps, t).Pb_inf[t]
                gap = abs(mixture_pb(trees, spec, eps) - expected)
                deviations["mixture"] = max(deviations["mixture"], gap)
                cases += 1
                if gap > MASS_TOLERANCE:
                    failures.append(f"t={t}, eps={eps}: mixture off by {gap:.3g}")

            limit_gap = _limit_deviation(trees, spec)
            deviations["limit"] = max(deviations["limit"], limit_gap)
            cases += 1
            if limit_gap > LIMIT_RELATIVE_TOLERANCE:
                failures.append(f"t={t}: per-graph 1/n limit off by {limit_gap:.3g} (relative)")

        cases += 1
        if not _cycle_order_ok(spec):
            failures.append("single-cycle graphs do not scale as 1/n")
    except AnalysisError as exc:
        failures.append(str(exc))

    result = CheckResult(
        name="mass_identity",
        passed=not failures,
        cases=cases,
        max_deviation=max(deviations["mass"], deviations["mixture"]),
        tolerance=MASS_TOLERANCE,
        failures=failures,
        details=deviations,
    )
    return record(state, result)


__all__ = ["run_mass_identity_check"]
