from __future__ import annotations

import logging
from typing import Sequence, Tuple

from src.framework.errors import ErrorCode, InputError
from src.schemas.ensemble_schema import Distribution, EnsembleSpec
from src.schemas.evolution_schema import DeTrajectory
from src.tools.ensemble_tools import evaluate, stability_bound

logger = logging.getLogger(__name__)

CONVERGED_BELOW = 1e-12
STALL_DELTA = 1e-15
MAX_DE_ITERATIONS = 100_000


def check_epsilon(epsilon: float) -> float:
    if not (0.0 <= epsilon <= 1.0):
        raise InputError(ErrorCode.EPSILON_OUT_OF_RANGE, f"epsilon = {epsilon} is outside [0, 1].")
    return float(epsilon)


def de_trajectory(spec: EnsembleSpec, epsilon: float, T: int) -> DeTrajectory:
    """
    Run density evolution for ``T`` iterations.

    Q[tau] = epsilon * lambda(P[tau-1]), P[tau] = 1 - rho(1 - Q[tau]), P[0] = 1,
    and Q is carried one step past T.
    """
    epsilon = check_epsilon(epsilon)
    if T < 0:
        raise InputError(ErrorCode.INVALID_ARGUMENT, f"T must be >= 0, got {T}.")

    P = [1.0]
    Q = [epsilon]
    for _ in range(T):
        q = epsilon * evaluate(spec, Distribution.LAMBDA, 0, P[-1])
        Q.append(q)
        P.append(min(1.0, max(0.0, 1.0 - evaluate(spec, Distribution.RHO, 0, 1.0 - q))))
    Q.append(epsilon * evaluate(spec, Distribution.LAMBDA, 0, P[-1]))

    pb_inf = [epsilon * evaluate(spec, Distribution.L, 0, p) for p in P]
    return DeTrajectory(epsilon=epsilon, T=T, P=P, Q=Q, Pb_inf=pb_inf)


def _descending(spec: EnsembleSpec, which: Distribution) -> Tuple[float, ...]:
    return tuple(float(c) for c in spec.coefficients(which)[::-1])


def _horner(coeffs: Sequence[float], x: float) -> float:
    acc = 0.0
    for c in coeffs:
        acc = acc * x + c
    return acc


def _iterate_to_limit(
    lam: Sequence[float], rho: Sequence[float], epsilon: float, max_iterations: int
) -> Tuple[bool, float, int]:
    """Iterate P <- 1 - rho(1 - eps*lambda(P)) from P = 1; returns (converged, P, iterations)."""
    p = 1.0
    for iteration in range(1, max_iterations + 1):
        nxt = 1.0 - _horner(rho, 1.0 - epsilon * _horner(lam, p))
        if nxt < CONVERGED_BELOW:
            return True, nxt, iteration
        if abs(p - nxt) <= STALL_DELTA:
            return False, nxt, iteration
        p = nxt
    return False, p, max_iterations


def de_fixed_point(spec: EnsembleSpec, epsilon: float, max_iterations: int = MAX_DE_ITERATIONS) -> float:
    """Limit of P_epsilon(t); 0 below threshold."""
    epsilon = check_epsilon(epsilon)
    converged, p, _ = _iterate_to_limit(
        _descending(spec, Distribution.LAMBDA), _descending(spec, Distribution.RHO), epsilon, max_iterations
    )
    return 0.0 if converged else p


def bp_threshold(spec: EnsembleSpec, tol: float = 1e-4, max_iterations: int = MAX_DE_ITERATIONS) -> float:
    """Bisection on epsilon for the largest channel under which P_epsilon(t) -> 0."""
    if tol <= 0:
        raise InputError(ErrorCode.INVALID_ARGUMENT, f"tol must be positive, got {tol}.")

    lam = _descending(spec, Distribution.LAMBDA)
    rho = _descending(spec, Distribution.RHO)

    hi = min(1.0, stability_bound(spec))
    if _iterate_to_limit(lam, rho, hi, max_iterations)[0]:
        logger.info("[density_evolution] DE converges up to the upper bracket %.6f", hi)
        return hi

    lo = 0.0
    steps = 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _iterate_to_limit(lam, rho, mid, max_iterations)[0]:
            lo = mid
        else:
            hi = mid
        steps += 1

    threshold = 0.5 * (lo + hi)
    logger.info(
        "[density_evolution] Threshold %.6f after %d bisection steps (tol=%g)", threshold, steps, tol
    )
    return threshold


__all__ = ["de_trajectory", "de_fixed_point", "bp_threshold", "check_epsilon"]
