"""
Single-cycle part of the finite-length correction and the assembled alpha.

The helper recursions f(tau, s, p) and g(tau, s, p) are affine in p, so they
are memoised as (a, b) pairs meaning a + b * p. G1, G2 and G3 are plain floats.
Any helper reached with a negative index raises INDEX_DOMAIN_VIOLATION; indices
are never clamped.
"""

from __future__ import annotations

import logging
import math
from typing import Dict, List, Optional, Tuple

from src.framework.errors import ErrorCode, InputError, InternalError
from src.schemas.ensemble_schema import Distribution, EnsembleSpec
from src.schemas.evolution_schema import CorrectionBreakdown, DeTrajectory, GammaState
from src.tools.density_evolution_tools import check_epsilon, de_trajectory
from src.tools.ensemble_tools import evaluate
from src.tools.tree_correction_tools import beta

logger = logging.getLogger(__name__)

Affine = Tuple[float, float]


class _GammaRecursions:
    def __init__(self, spec: EnsembleSpec, epsilon: float, traj: DeTrajectory):
        self.spec = spec
        self.epsilon = epsilon
        self.traj = traj
        self.lam1 = evaluate(spec, Distribution.LAMBDA, 1, 1.0)
        self.rho1 = evaluate(spec, Distribution.RHO, 1, 1.0)

        self.f_table: Dict[Tuple[int, int], Affine] = {}
        self.g_table: Dict[Tuple[int, int], Affine] = {}
        self.G1_table: Dict[Tuple[int, int], float] = {}
        self.G2_table: Dict[Tuple[int, int], float] = {}
        self.G3_table: Dict[Tuple[int, int], float] = {}

    def _guard(self, helper: str, tau: int, s: int) -> None:
        if tau < 0 or s < 0:
            raise InternalError(
                ErrorCode.INDEX_DOMAIN_VIOLATION,
                f"{helper}(tau={tau}, s={s}) reached outside its domain.",
                detail={"helper": helper, "tau": tau, "s": s},
            )

    def r(self, tau: int) -> float:
        if tau < 1:
            raise InternalError(
                ErrorCode.INDEX_DOMAIN_VIOLATION, f"r(tau={tau}) needs tau >= 1.", detail={"tau": tau}
            )
        y = 1.0 - self.traj.Q[tau]
        return evaluate(self.spec, Distribution.RHO, 1, y) / self.rho1

    def m(self, tau: int) -> float:
        return self.epsilon * evaluate(self.spec, Distribution.LAMBDA, 1, self.traj.P[tau]) / self.lam1

    def f(self, tau: int, s: int) -> Affine:
        self._guard("f", tau, s)
        key = (tau, s)
        if key in self.f_table:
            return self.f_table[key]
        if tau == 0:
            value = (self.epsilon, 0.0)
        else:
            m = self.m(tau)
            a, b = self.g(tau, s - 1)
            value = (m * a, m * b)
        self.f_table[key] = value
        return value

    def g(self, tau: int, s: int) -> Affine:
        self._guard("g", tau, s)
        key = (tau, s)
        if key in self.g_table:
            return self.g_table[key]
        if s == 0:
            value = (0.0, 1.0)
        else:
            r = self.r(tau)
            a, b = self.f(tau - 1, s)
            value = (1.0 - r + r * a, r * b)
        self.g_table[key] = value
        return value

    def f_at(self, tau: int, s: int, p: float) -> float:
        a, b = self.f(tau, s)
        return a + b * p

    def g_at(self, tau: int, s: int, p: float) -> float:
        a, b = self.g(tau, s)
        return a + b * p

    def G1(self, tau: int, s: int) -> float:
        self._guard("G1", tau, s)
        key = (tau, s)
        if key not in self.G1_table:
            if s == 0:
                value = 1.0
            else:
                r = self.r(tau)
                value = (
                    (1.0 - r) ** 2
                    + 2.0 * r * (1.0 - r) * self.f_at(tau - 1, s, 1.0)
                    + r * r * self.G2(tau - 1, s - 1)
                )
            self.G1_table[key] = value
        return self.G1_table[key]

    def G2(self, tau: int, s: int) -> float:
        self._guard("G2", tau, s)
        key = (tau, s)
        if key not in self.G2_table:
            m = self.m(tau)
            self.G2_table[key] = m if s == 0 else m * m * self.G1(tau, s - 1)
        return self.G2_table[key]

    def G3(self, tau: int, s: int) -> float:
        self._guard("G3", tau, s)
        key = (tau, s)
        if key not in self.G3_table:
            m = self.m(tau)
            if s == 0:
                value = 1.0 - m
            else:
                value = 1.0 - 2.0 * self.f_at(tau, s + 1, 1.0) + m * m * self.G1(tau, s - 1)
            self.G3_table[key] = value
        return self.G3_table[key]


def gamma(
    spec: EnsembleSpec, epsilon: float, t: int, traj: Optional[DeTrajectory] = None
) -> GammaState:
    """gamma(epsilon, t): the variable-rooted, check-rooted and root-cycle families summed."""
    epsilon = check_epsilon(epsilon)
    if t < 0:
        raise InputError(ErrorCode.INVALID_ARGUMENT, f"t must be >= 0, got {t}.")
    if traj is None:
        traj = de_trajectory(spec, epsilon, t)
    if traj.T < t:
        raise InputError(
            ErrorCode.TRAJECTORY_TOO_SHORT, f"trajectory has T={traj.T}; Q(t+1) needs T >= {t}."
        )

    rec = _GammaRecursions(spec, epsilon, traj)
    lam1, rho1 = rec.lam1, rec.rho1
    lam2 = evaluate(spec, Distribution.LAMBDA, 2, 1.0)
    rho2 = evaluate(spec, Distribution.RHO, 2, 1.0)
    growth = lam1 * rho1
    q_next = traj.Q[t + 1]

    fv_terms: List[float] = []
    if lam2 != 0.0:
        for s1 in range(1, t):
            ratio = evaluate(spec, Distribution.LAMBDA, 2, traj.P[t - s1]) / lam2
            r_entry = rec.r(t - s1 + 1)
            for s2 in range(2 * s1 + 1, 2 * t + 1):
                inner = 1.0 - r_entry * (1.0 - epsilon * ratio * rec.G1(t - s1, s2 - 2 * s1 - 1))
                fv_terms.append(
                    0.5 * lam2 * rho1**2 * growth ** (s2 - s1 - 2) * q_next * rec.g_at(t, s1 - 1, inner)
                )

    fc_terms: List[float] = []
    if rho2 != 0.0:
        for s1 in range(0, t):
            ratio = evaluate(spec, Distribution.RHO, 2, 1.0 - traj.Q[t - s1]) / rho2
            for s2 in range(2 * s1 + 2, 2 * t + 1):
                inner = 1.0 - ratio * rec.G3(t - s1 - 1, s2 - 2 * s1 - 2)
                fc_terms.append(
                    0.5 * rho2 * lam1 * growth ** (s2 - s1 - 2) * q_next * rec.g_at(t, s1, inner)
                )

    fr_terms: List[float] = []
    if t > 0:
        m_t = rec.m(t)
        for s in range(1, 2 * t + 1):
            fr_terms.append(0.5 * growth**s * m_t * rec.G1(t, s - 1))

    value = math.fsum(fv_terms + fc_terms + fr_terms)
    if not math.isfinite(value):
        raise InternalError(
            ErrorCode.NON_FINITE_RESULT, f"gamma({epsilon}, {t}) is not finite: {value}."
        )

    logger.debug(
        "[cycle_correction] gamma(%.4f, %d) = %.12g (%d memo entries)",
        epsilon, t, value, len(rec.f_table) + len(rec.g_table),
    )
    return GammaState(
        epsilon=epsilon,
        t=t,
        f_table=rec.f_table,
        g_table=rec.g_table,
        G1_table=rec.G1_table,
        G2_table=rec.G2_table,
        G3_table=rec.G3_table,
        sum_Fv=math.fsum(fv_terms),
        sum_Fc=math.fsum(fc_terms),
        sum_Fr=math.fsum(fr_terms),
        gamma=value,
    )


def alpha(spec: EnsembleSpec, epsilon: float, t: int, *, include_gamma: bool = True) -> CorrectionBreakdown:
    """alpha = beta + gamma, both evaluated on one trajectory run to T = t + 1."""
    epsilon = check_epsilon(epsilon)
    if t < 0:
        raise InputError(ErrorCode.INVALID_ARGUMENT, f"t must be >= 0, got {t}.")
    traj = de_trajectory(spec, epsilon, t + 1)
    tree = beta(spec, epsilon, t, traj)
    cycle = gamma(spec, epsilon, t, traj).gamma if include_gamma else 0.0
    return CorrectionBreakdown(
        epsilon=epsilon,
        t=t,
        beta=tree.beta,
        gamma=cycle,
        alpha=tree.beta + cycle,
        pb_inf=traj.Pb_inf[t],
        E_KK=tree.E_KK,
        sum_VV_term=tree.sum_VV_term,
        sum_CC_term=tree.sum_CC_term,
    )


__all__ = ["gamma", "alpha"]
