from __future__ import annotations

import logging
from typing import List

from src.checks.supervisor import GateState, record
from src.framework.check_registry import CheckRegistry
from src.framework.errors import AnalysisError
from src.schemas.report_schema import CheckResult
from src.tools.tree_correction_tools import beta, gen_factorial_moment, moments_agree

logger = logging.getLogger(__name__)

RELATIVE_TOLERANCE = 1e-4
MAX_DEPTH = 5

CheckRegistry.register_check(
    name="generating_function",
    description="Closed-form second factorial moments against finite differences of the tree generating function.",
    order=20,
)


def _relative_gap(a: float, b: float) -> float:
    scale = max(abs(a), abs(b))
    return abs(a - b) / scale if scale > 0 else 0.0


def run_generating_function_check(state: GateState) -> GateState:
    """Compare E[K(K-1)P], E[V_i(V_i-1)P] and E[C_j(C_j-1)P] with their numerical counterparts."""
    spec = state["ensemble"]
    depth = min(state["t_max"], MAX_DEPTH)
    logger.info("[generating_function] Checking t = 1..%d", depth)

    failures: List[str] = []
    worst = 0.0
    cases = 0
    try:
        for t in range(1, depth + 1):
            for eps in state["epsilons"]:
                closed = beta(spec, eps, t)
                pairs = [("K", None, closed.E_KK)]
                pairs += [("V", i, value) for i, value in closed.E_VV.items()]
                pairs += [("C", j, value) for j, value in closed.E_CC.items()]
                for marker, degree, value in pairs:
                    numeric = gen_factorial_moment(spec, eps, t, marker, degree)
                    cases += 1
                    worst = max(worst, _relative_gap(value, numeric))
                    if not moments_agree(value, numeric, RELATIVE_TOLERANCE):
                        label = marker if degree is None else f"{marker}{degree}"
                        failures.append(f"t={t}, eps={eps}, {label}: {value:.12g} vs {numeric:.12g}")
    except AnalysisError as exc:
        failures.append(str(exc))

    return record(
        state,
        CheckResult(
            name="generating_function",
            passed=not failures,
            cases=cases,
            max_deviation=worst,
            tolerance=RELATIVE_TOLERANCE,
            failures=failures,
        ),
    )


__all__ = ["run_generating_function_check"]
