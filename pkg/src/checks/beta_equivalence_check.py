from __future__ import annotations

import logging
from typing import List

from src.checks.supervisor import GateState, record
from src.framework.check_registry import CheckRegistry
from src.framework.errors import AnalysisError
from src.schemas.report_schema import CheckResult
from src.tools.oracle_tools import MAX_ENUMERATION_DEPTH, beta_oracle, enumerate_trees
from src.tools.tree_correction_tools import beta

logger = logging.getLogger(__name__)

ABSOLUTE_TOLERANCE = 1e-9

CheckRegistry.register_check(
    name="beta_equivalence",
    description="Recursive beta against explicit tree enumeration.",
    order=30,
)


def run_beta_equivalence_check(state: GateState) -> GateState:
    spec = state["ensemble"]
    depth = min(state["t_max"], MAX_ENUMERATION_DEPTH)
    logger.info("[beta_equivalence] Checking t = 1..%d", depth)

    failures: List[str] = []
    worst = 0.0
    cases = 0
    try:
        for t in range(1, depth + 1):
            trees = enumerate_trees(spec, t)
            for eps in state["epsilons"]:
                recursive = beta(spec, eps, t).beta
                enumerated = beta_oracle(spec, eps, t, trees=trees)
                gap = abs(recursive - enumerated)
                worst = max(worst, gap)
                cases += 1
                if gap > ABSOLUTE_TOLERANCE:
                    failures.append(f"t={t}, eps={eps}: {recursive:.12g} vs {enumerated:.12g}")
    except AnalysisError as exc:
        failures.append(str(exc))

    return record(
        state,
        CheckResult(
            name="beta_equivalence",
            passed=not failures,
            cases=cases,
            max_deviation=worst,
            tolerance=ABSOLUTE_TOLERANCE,
            failures=failures,
        ),
    )


__all__ = ["run_beta_equivalence_check"]
