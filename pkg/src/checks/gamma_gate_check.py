"""
Gamma gate: alpha = beta + gamma must fall inside the interval of the value
extrapolated from exact averages over sampled graphs at tiny blocklengths.
"""

from __future__ import annotations

import logging
from typing import Dict, List

from src.checks.supervisor import GateState, record
from src.framework.check_registry import CheckRegistry
from src.framework.errors import AnalysisError
from src.schemas.report_schema import CheckResult
from src.tools.cycle_correction_tools import alpha
from src.tools.oracle_tools import MAX_ENUMERATION_DEPTH, alpha_extrapolate, realizable_blocklengths

logger = logging.getLogger(__name__)

MAX_BLOCKLENGTHS = 3

CheckRegistry.register_check(
    name="gamma_gate",
    description="beta + gamma inside the bootstrap interval of the finite-n extrapolation.",
    order=40,
)


def _blocklengths(state: GateState) -> List[int]:
    if state.get("gamma_n_list"):
        return sorted(set(state["gamma_n_list"]))
    return realizable_blocklengths(state["ensemble"])[-MAX_BLOCKLENGTHS:]


def run_gamma_gate_check(state: GateState) -> GateState:
    spec = state["ensemble"]
    depth = min(state["t_max"], MAX_ENUMERATION_DEPTH)
    failures: List[str] = []
    worst = 0.0
    cases = 0
    intervals: Dict[str, Dict[str, object]] = {}

    try:
        n_list = _blocklengths(state)
        logger.info(
            "[gamma_gate] n=%s, %d graphs per n, t = 1..%d", n_list, state["gamma_graphs"], depth
        )
        if len(n_list) < 2:
            failures.append(f"need two exactly realizable blocklengths <= 16, found {n_list}")
        else:
            for t in range(1, depth + 1):
                for eps in state["gamma_epsilons"]:
                    predicted = alpha(spec, eps, t).alpha
                    estimate = alpha_extrapolate(
                        spec,
                        eps,
                        t,
                        n_list,
                        state["gamma_graphs"],
                        state["seed"],
                        workers=state["workers"],
                    )
                    cases += 1
                    worst = max(worst, abs(predicted - estimate.alpha_hat))
                    intervals[f"t={t},eps={eps}"] = {
                        "alpha": predicted,
                        "ci": [estimate.ci_low, estimate.ci_high],
                        "bias": estimate.bias,
                        "fit_n": estimate.fit_n,
                    }
                    if not estimate.brackets(predicted):
                        failures.append(
                            f"t={t}, eps={eps}: alpha {predicted:.6g} outside "
                            f"[{estimate.ci_low:.6g}, {estimate.ci_high:.6g}]"
                        )
    except AnalysisError as exc:
        failures.append(str(exc))

    return record(
        state,
        CheckResult(
            name="gamma_gate",
            passed=not failures,
            cases=cases,
            max_deviation=worst,
            failures=failures,
            details={"intervals": intervals},
        ),
    )


__all__ = ["run_gamma_gate_check"]
