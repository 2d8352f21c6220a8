"""
Cycle-free part of the finite-length correction.

All three marker families (edge count K, variable counts V_i, check counts C_j)
share one recursion shape. They differ only in how the marker enters the
lambda, rho and L polynomials, so each family is described by a ``_Marker``
and run through ``_run_family``.
"""

from __future__ import annotations

import logging
import math
from typing import Callable, Dict, NamedTuple, Optional

from src.framework.errors import ErrorCode, InputError
from src.schemas.ensemble_schema import Distribution, EnsembleSpec
from src.schemas.evolution_schema import BetaState, DeTrajectory, GenArgs, RecursionTrace
from src.tools.density_evolution_tools import check_epsilon, de_trajectory
from src.tools.ensemble_tools import evaluate

logger = logging.getLogger(__name__)

FD_BASE_STEP = 1e-3


def _zero(_: float) -> float:
    return 0.0


class _Marker(NamedTuple):
    """d/dx of the marked lambda / rho / L terms at x = 1, as functions of their argument."""

    lam: Callable[[float], float]
    lam_prime: Callable[[float], float]
    rho: Callable[[float], float]
    rho_prime: Callable[[float], float]
    node_prime: Callable[[float], float]


def _edge_marker(spec: EnsembleSpec) -> _Marker:
    return _Marker(
        lam=lambda x: evaluate(spec, Distribution.LAMBDA, 0, x),
        lam_prime=lambda x: evaluate(spec, Distribution.LAMBDA, 1, x),
        rho=lambda x: evaluate(spec, Distribution.RHO, 0, x),
        rho_prime=lambda x: evaluate(spec, Distribution.RHO, 1, x),
        node_prime=_zero,
    )


def _variable_marker(spec: EnsembleSpec, degree: int) -> _Marker:
    mass = spec.lambda_[degree]
    node_mass = spec.L[degree]
    return _Marker(
        lam=lambda x: mass * x ** (degree - 1),
        lam_prime=lambda x: mass * (degree - 1) * x ** (degree - 2),
        rho=_zero,
        rho_prime=_zero,
        node_prime=lambda x: node_mass * degree * x ** (degree - 1),
    )


def _check_marker(spec: EnsembleSpec, degree: int) -> _Marker:
    mass = spec.rho[degree]
    return _Marker(
        lam=_zero,
        lam_prime=_zero,
        rho=lambda x: mass * x ** (degree - 1),
        rho_prime=lambda x: mass * (degree - 1) * x ** (degree - 2),
        node_prime=_zero,
    )


def _require_trajectory(traj: DeTrajectory, epsilon: float, t: int) -> None:
    if traj.T < t:
        raise InputError(
            ErrorCode.TRAJECTORY_TOO_SHORT, f"trajectory has T={traj.T}, need at least {t}."
        )
    if traj.epsilon != epsilon:
        raise InputError(
            ErrorCode.INVALID_ARGUMENT,
            f"trajectory epsilon {traj.epsilon} differs from requested {epsilon}.",
        )


def _run_family(
    spec: EnsembleSpec, epsilon: float, t: int, traj: DeTrajectory, marker: _Marker
) -> tuple[RecursionTrace, float]:
    """First and second x-derivatives of f, g, F, G at x = 1; returns the trace and E[X(X-1)P]."""
    lam1 = evaluate(spec, Distribution.LAMBDA, 1, 1.0)
    lam2 = evaluate(spec, Distribution.LAMBDA, 2, 1.0)
    rho1 = evaluate(spec, Distribution.RHO, 1, 1.0)
    rho2 = evaluate(spec, Distribution.RHO, 2, 1.0)

    trace = RecursionTrace(
        f1=[0.0], g1=[0.0], F1=[0.0], G1=[0.0], f2=[0.0], g2=[0.0], F2=[0.0], G2=[0.0]
    )
    for tau in range(1, t + 1):
        p_prev = traj.P[tau - 1]
        y = 1.0 - traj.Q[tau]
        f1p, f2p = trace.f1[-1], trace.f2[-1]
        F1p, F2p = trace.F1[-1], trace.F2[-1]

        g1 = lam1 * f1p + marker.lam(1.0)
        f1 = rho1 * g1 + marker.rho(1.0)
        G1 = (
            g1
            - epsilon * evaluate(spec, Distribution.LAMBDA, 1, p_prev) * F1p
            - epsilon * marker.lam(p_prev)
        )
        F1 = f1 - evaluate(spec, Distribution.RHO, 1, y) * G1 - marker.rho(y)

        g2 = lam2 * f1p**2 + lam1 * f2p + 2.0 * marker.lam_prime(1.0) * f1p
        f2 = rho2 * g1**2 + rho1 * g2 + 2.0 * marker.rho_prime(1.0) * g1
        G2 = g2 - epsilon * (
            evaluate(spec, Distribution.LAMBDA, 2, p_prev) * F1p**2
            + evaluate(spec, Distribution.LAMBDA, 1, p_prev) * F2p
            + 2.0 * marker.lam_prime(p_prev) * F1p
        )
        F2 = f2 - (
            evaluate(spec, Distribution.RHO, 2, y) * G1**2
            + evaluate(spec, Distribution.RHO, 1, y) * G2
            + 2.0 * marker.rho_prime(y) * G1
        )

        for name, value in (
            ("f1", f1), ("g1", g1), ("F1", F1), ("G1", G1),
            ("f2", f2), ("g2", g2), ("F2", F2), ("G2", G2),
        ):
            getattr(trace, name).append(value)

    p_t = traj.P[t]
    F1, F2 = trace.F1[-1], trace.F2[-1]
    expectation = epsilon * (
        evaluate(spec, Distribution.L, 2, p_t) * F1**2
        + evaluate(spec, Distribution.L, 1, p_t) * F2
        + 2.0 * marker.node_prime(p_t) * F1
    )
    return trace, expectation


def beta(
    spec: EnsembleSpec, epsilon: float, t: int, traj: Optional[DeTrajectory] = None
) -> BetaState:
    """
    beta(epsilon, t) from the edge, variable-degree and check-degree recursions.

    beta = [E[K(K-1)P] - sum_i (i/lambda_i) E[V_i(V_i-1)P] - sum_j (j/rho_j) E[C_j(C_j-1)P]]
           / (2 L'(1))
    """
    epsilon = check_epsilon(epsilon)
    if t < 0:
        raise InputError(ErrorCode.INVALID_ARGUMENT, f"t must be >= 0, got {t}.")
    if traj is None:
        traj = de_trajectory(spec, epsilon, t)
    _require_trajectory(traj, epsilon, t)

    edge, e_kk = _run_family(spec, epsilon, t, traj, _edge_marker(spec))

    variable: Dict[int, RecursionTrace] = {}
    e_vv: Dict[int, float] = {}
    for degree in spec.lambda_:
        variable[degree], e_vv[degree] = _run_family(
            spec, epsilon, t, traj, _variable_marker(spec, degree)
        )

    check: Dict[int, RecursionTrace] = {}
    e_cc: Dict[int, float] = {}
    for degree in spec.rho:
        check[degree], e_cc[degree] = _run_family(spec, epsilon, t, traj, _check_marker(spec, degree))

    sum_vv = math.fsum(degree / spec.lambda_[degree] * e_vv[degree] for degree in e_vv)
    sum_cc = math.fsum(degree / spec.rho[degree] * e_cc[degree] for degree in e_cc)
    avg_degree = evaluate(spec, Distribution.L, 1, 1.0)
    value = (e_kk - sum_vv - sum_cc) / (2.0 * avg_degree)

    logger.debug("[tree_correction] beta(%.4f, %d) = %.12g", epsilon, t, value)
    return BetaState(
        epsilon=epsilon,
        t=t,
        edge=edge,
        variable=variable,
        check=check,
        E_KK=e_kk,
        E_VV=e_vv,
        E_CC=e_cc,
        sum_VV_term=sum_vv,
        sum_CC_term=sum_cc,
        beta=value,
    )


def mean_tree_edges(spec: EnsembleSpec, t: int) -> float:
    """Expected number of edges in a depth-t tree neighbourhood, L'(1) f'(t)."""
    traj = de_trajectory(spec, 1.0, t)
    edge, _ = _run_family(spec, 1.0, t, traj, _edge_marker(spec))
    return evaluate(spec, Distribution.L, 1, 1.0) * edge.f1[-1]


# --------------------------------------------------------------------------
# Generating function
# --------------------------------------------------------------------------

def _marked(masses: Dict[int, float], markers: Dict[int, float], shift: int, x: float) -> float:
    return math.fsum(
        mass * markers.get(degree, 1.0) * x ** (degree - shift) for degree, mass in masses.items()
    )


def gen_eval(spec: EnsembleSpec, epsilon: float, t: int, args: GenArgs) -> float:
    """E_t[prod_k y_k^{V_k} prod_l z_l^{C_l} P], i.e. epsilon * L_marked(F(t))."""
    epsilon = check_epsilon(epsilon)
    if t < 0:
        raise InputError(ErrorCode.INVALID_ARGUMENT, f"t must be >= 0, got {t}.")
    for value in list(args.y.values()) + list(args.z.values()):
        if not math.isfinite(value):
            raise InputError(ErrorCode.INVALID_ARGUMENT, "generating-function markers must be finite.")

    def lam(x: float) -> float:
        return _marked(spec.lambda_, args.y, 1, x)

    def rho(x: float) -> float:
        return _marked(spec.rho, args.z, 1, x)

    f = F = 1.0
    for _ in range(t):
        g = lam(f)
        G = g - epsilon * lam(F)
        f = rho(g)
        F = f - rho(G)

    return epsilon * _marked(spec.L, args.y, 0, F)


def _fd_second(phi: Callable[[float], float], h: float) -> float:
    return (phi(1.0 + h) - 2.0 * phi(1.0) + phi(1.0 - h)) / (h * h)


def fd_step(spec: EnsembleSpec, t: int) -> float:
    return FD_BASE_STEP / max(1.0, mean_tree_edges(spec, t))


def gen_factorial_moment(
    spec: EnsembleSpec,
    epsilon: float,
    t: int,
    marker: str,
    degree: Optional[int] = None,
    h: Optional[float] = None,
) -> float:
    """
    Second factorial moment E_t[X(X-1)P] by a central difference of the generating function.

    ``marker`` is ``"K"`` (edges, via (1/x) gen at y = z = x), ``"V"`` (y_degree = x)
    or ``"C"`` (z_degree = x).
    """
    if h is None:
        h = fd_step(spec, t)
    var_degrees, chk_degrees = list(spec.lambda_), list(spec.rho)

    if marker == "K":
        def phi(x: float) -> float:
            return gen_eval(spec, epsilon, t, GenArgs.uniform(x, var_degrees, chk_degrees)) / x
    elif marker == "V":
        if degree not in spec.lambda_:
            raise InputError(ErrorCode.INVALID_ARGUMENT, f"variable degree {degree} is not in lambda.")

        def phi(x: float) -> float:
            return gen_eval(spec, epsilon, t, GenArgs(y={degree: x}))
    elif marker == "C":
        if degree not in spec.rho:
            raise InputError(ErrorCode.INVALID_ARGUMENT, f"check degree {degree} is not in rho.")

        def phi(x: float) -> float:
            return gen_eval(spec, epsilon, t, GenArgs(z={degree: x}))
    else:
        raise InputError(ErrorCode.INVALID_ARGUMENT, f"unknown marker {marker!r}.")

    return _fd_second(phi, h)


def moments_agree(closed_form: float, finite_difference: float, rel_tol: float = 1e-4) -> bool:
    scale = max(abs(closed_form), abs(finite_difference))
    return abs(closed_form - finite_difference) <= rel_tol * scale + 1e-10


__all__ = [
    "beta",
    "gen_eval",
    "gen_factorial_moment",
    "mean_tree_edges",
    "fd_step",
    "moments_agree",
]
