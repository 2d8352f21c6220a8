"""
Monte Carlo estimation of P_b(n, epsilon, t) over the configuration-model ensemble.

Every trial draws a fresh graph and a fresh erasure pattern from its own
generator ``default_rng([seed, trial])``. Trials are grouped into fixed-size
chunks whose boundaries depend only on the trial count, and per-chunk
(count, sum, sum of squares) triples are merged in chunk order, so the result
is the same for any worker count.
"""

from __future__ import annotations

import itertools
import logging
import math
from fractions import Fraction
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from src.config import get_settings
from src.framework.errors import ErrorCode, InputError
from src.framework.parallel import chunk_ranges, parallel_map
from src.schemas.ensemble_schema import DegreeProfile, EnsembleSpec
from src.schemas.graph_schema import TannerGraphInstance
from src.schemas.simulation_schema import SimEstimate
from src.tools.density_evolution_tools import check_epsilon, de_trajectory

logger = logging.getLogger(__name__)

INTEGRALITY_TOLERANCE = 1e-9


# --------------------------------------------------------------------------
# Degree sequences
# --------------------------------------------------------------------------

def _largest_remainder(targets: Dict[int, float], total: int) -> Dict[int, int]:
    floors = {d: math.floor(v) for d, v in targets.items()}
    short = total - sum(floors.values())
    order = sorted(targets, key=lambda d: (-(targets[d] - floors[d]), d))
    for d in order[: max(short, 0)]:
        floors[d] += 1
    return floors


def _is_integral(value) -> bool:
    if isinstance(value, Fraction):
        return value.denominator == 1
    return abs(value - round(value)) <= INTEGRALITY_TOLERANCE


def realize_degree_sequence(spec: EnsembleSpec, n: int, *, exact: bool = False) -> DegreeProfile:
    """
    Integer node counts for blocklength ``n``.

    Variable counts come from largest-remainder rounding of n * L_i, check counts
    from rounding E * rho_j / j. When the sockets disagree, each class may move by
    at most one node; the repair with the smallest total deviation from the targets
    wins. ``exact=True`` rejects any n that needs rounding at all.
    """
    if n < 1:
        raise InputError(ErrorCode.INVALID_ARGUMENT, f"n must be >= 1, got {n}.")

    node_masses = spec.exact_L if spec.is_exact and spec.exact_L else spec.L
    edge_rho = spec.exact_rho if spec.is_exact else spec.rho
    var_targets = {i: n * node_masses[i] for i in sorted(node_masses)}

    if all(_is_integral(v) for v in var_targets.values()):
        var_counts = {i: int(round(v)) for i, v in var_targets.items()}
        edges = sum(i * c for i, c in var_counts.items())
        chk_targets = {j: edges * edge_rho[j] / j for j in sorted(edge_rho)}
        if all(_is_integral(v) for v in chk_targets.values()):
            chk_counts = {j: int(round(v)) for j, v in chk_targets.items()}
            return _profile(n, var_counts, chk_counts, exact=True)

    if exact:
        raise InputError(
            ErrorCode.UNREALIZABLE_BLOCKLENGTH,
            f"n={n} does not realise the degree distributions with integer counts.",
        )

    var_float = {i: float(v) for i, v in var_targets.items()}
    base_var = _largest_remainder(var_float, n)
    var_degrees = sorted(base_var)
    chk_degrees = sorted(edge_rho)

    best: Optional[Tuple[float, Tuple[int, ...], Dict[int, int], Dict[int, int]]] = None
    for var_delta in itertools.product((-1, 0, 1), repeat=len(var_degrees)):
        if sum(var_delta) != 0:
            continue
        var_counts = {d: base_var[d] + dv for d, dv in zip(var_degrees, var_delta)}
        if any(c < 0 for c in var_counts.values()):
            continue
        edges = sum(i * c for i, c in var_counts.items())
        chk_float = {j: edges * float(edge_rho[j]) / j for j in chk_degrees}
        base_chk = {j: int(round(v)) for j, v in chk_float.items()}

        for chk_delta in itertools.product((-1, 0, 1), repeat=len(chk_degrees)):
            chk_counts = {j: base_chk[j] + dc for j, dc in zip(chk_degrees, chk_delta)}
            if any(c < 0 for c in chk_counts.values()) or sum(chk_counts.values()) == 0:
                continue
            if sum(j * c for j, c in chk_counts.items()) != edges:
                continue
            cost = sum(abs(var_counts[d] - var_float[d]) for d in var_degrees) + sum(
                abs(chk_counts[j] - chk_float[j]) for j in chk_degrees
            )
            key = (cost, var_delta + chk_delta)
            if best is None or key < (best[0], best[1]):
                best = (cost, var_delta + chk_delta, var_counts, chk_counts)

    if best is None:
        raise InputError(
            ErrorCode.UNREALIZABLE_BLOCKLENGTH,
            f"n={n}: no integral repair within +-1 per degree class balances the sockets.",
        )
    logger.debug("[simulator] n=%d realised with repair cost %.4f", n, best[0])
    return _profile(n, best[2], best[3], exact=False)


def _profile(n: int, var_counts: Dict[int, int], chk_counts: Dict[int, int], *, exact: bool) -> DegreeProfile:
    var_counts = {d: c for d, c in var_counts.items() if c > 0}
    chk_counts = {d: c for d, c in chk_counts.items() if c > 0}
    return DegreeProfile(
        n=n,
        m=sum(chk_counts.values()),
        edges=sum(d * c for d, c in var_counts.items()),
        variable_counts=var_counts,
        check_counts=chk_counts,
        exact=exact,
    )


# --------------------------------------------------------------------------
# Graph sampling and decoding
# --------------------------------------------------------------------------

def sample_graph(
    variable_degrees: Sequence[int], check_degrees: Sequence[int], rng: np.random.Generator
) -> TannerGraphInstance:
    """Uniform pairing of variable sockets with check sockets; multi-edges allowed."""
    var_degrees = np.asarray(variable_degrees, dtype=np.int64)
    chk_degrees = np.asarray(check_degrees, dtype=np.int64)
    if var_degrees.sum() != chk_degrees.sum():
        raise InputError(
            ErrorCode.INVALID_ARGUMENT,
            f"socket totals differ: {int(var_degrees.sum())} vs {int(chk_degrees.sum())}.",
        )

    edges = int(var_degrees.sum())
    check_socket_owner = np.repeat(np.arange(chk_degrees.size), chk_degrees)
    permutation = rng.permutation(edges)
    return TannerGraphInstance(
        n=int(var_degrees.size),
        m=int(chk_degrees.size),
        variable_degrees=var_degrees.tolist(),
        check_degrees=chk_degrees.tolist(),
        socket_permutation=permutation,
        var_of_edge=np.repeat(np.arange(var_degrees.size), var_degrees),
        chk_of_edge=check_socket_owner[permutation],
    )


def _still_erased(
    var_of_edge: np.ndarray,
    chk_of_edge: np.ndarray,
    n: int,
    m: int,
    erased: np.ndarray,
    t: int,
) -> np.ndarray:
    """Flooding BP with per-node counters; boolean mask of bits erased after ``t`` iterations."""
    erased = np.asarray(erased, dtype=bool)
    if t == 0:
        return erased.copy()

    channel_on_edge = erased[var_of_edge]
    v2c = channel_on_edge.copy()
    known_in = np.zeros(n, dtype=np.int64)
    for _ in range(t):
        erased_at_check = np.bincount(chk_of_edge, weights=v2c, minlength=m).astype(np.int64)
        c2v_erased = (erased_at_check[chk_of_edge] - v2c) > 0
        c2v_known = ~c2v_erased
        known_in = np.bincount(var_of_edge, weights=c2v_known, minlength=n).astype(np.int64)
        v2c = channel_on_edge & ((known_in[var_of_edge] - c2v_known) == 0)

    return erased & (known_in == 0)


def bp_decode(g: TannerGraphInstance, erased: np.ndarray, t: int) -> int:
    """Number of bits still erased after ``t`` flooding iterations."""
    erased = np.asarray(erased, dtype=bool)
    if erased.shape != (g.n,):
        raise InputError(ErrorCode.INVALID_ARGUMENT, f"erased must have length {g.n}.")
    if t < 0:
        raise InputError(ErrorCode.INVALID_ARGUMENT, f"t must be >= 0, got {t}.")
    return int(_still_erased(g.var_of_edge, g.chk_of_edge, g.n, g.m, erased, t).sum())


# --------------------------------------------------------------------------
# Estimation
# --------------------------------------------------------------------------

class _ChunkTask(NamedTuple):
    variable_degrees: Tuple[int, ...]
    check_degrees: Tuple[int, ...]
    epsilon: float
    t: int
    seed: int
    start: int
    stop: int


def _simulate_chunk(task: _ChunkTask) -> Tuple[int, float, float]:
    """Decode a chunk of trials as one disjoint union of graphs; returns (count, sum, sumsq)."""
    n, m = len(task.variable_degrees), len(task.check_degrees)
    edges = sum(task.variable_degrees)
    blocks = task.stop - task.start

    var_of_edge = np.empty(blocks * edges, dtype=np.int64)
    chk_of_edge = np.empty(blocks * edges, dtype=np.int64)
    erased = np.empty(blocks * n, dtype=bool)
    for b, trial in enumerate(range(task.start, task.stop)):
        rng = np.random.default_rng([task.seed, trial])
        g = sample_graph(task.variable_degrees, task.check_degrees, rng)
        var_of_edge[b * edges:(b + 1) * edges] = g.var_of_edge + b * n
        chk_of_edge[b * edges:(b + 1) * edges] = g.chk_of_edge + b * m
        erased[b * n:(b + 1) * n] = rng.random(n) < task.epsilon

    mask = _still_erased(var_of_edge, chk_of_edge, blocks * n, blocks * m, erased, task.t)
    fractions = mask.reshape(blocks, n).sum(axis=1) / n
    return blocks, float(fractions.sum()), float(np.square(fractions).sum())


def estimate_pb(
    spec: EnsembleSpec,
    n: int,
    epsilon: float,
    t: int,
    trials: int,
    seed: int,
    *,
    workers: int = 1,
    chunk_size: Optional[int] = None,
    progress: bool = False,
) -> SimEstimate:
    """Annealed estimate of P_b(n, epsilon, t) and the scaled gap n (pb_hat - pb_inf)."""
    epsilon = check_epsilon(epsilon)
    if trials < 1:
        raise InputError(ErrorCode.INVALID_ARGUMENT, f"trials must be >= 1, got {trials}.")
    if t < 0:
        raise InputError(ErrorCode.INVALID_ARGUMENT, f"t must be >= 0, got {t}.")

    profile = realize_degree_sequence(spec, n)
    chunk_size = chunk_size or get_settings().chunk_size
    tasks: List[_ChunkTask] = [
        _ChunkTask(
            tuple(profile.variable_degrees()),
            tuple(profile.check_degrees()),
            epsilon,
            t,
            seed,
            start,
            stop,
        )
        for start, stop in chunk_ranges(trials, chunk_size)
    ]

    logger.info(
        "[simulator] n=%d eps=%.4f t=%d trials=%d in %d chunks", n, epsilon, t, trials, len(tasks)
    )
    partials = parallel_map(
        _simulate_chunk, tasks, workers, progress=progress, desc=f"n={n} eps={epsilon:.3f}"
    )

    count = 0
    total = 0.0
    total_sq = 0.0
    for c, s, sq in partials:
        count += c
        total += s
        total_sq += sq

    pb_hat = total / count
    if count > 1:
        variance = max(0.0, (total_sq - count * pb_hat * pb_hat) / (count - 1))
        stderr = math.sqrt(variance / count)
    else:
        stderr = 0.0

    pb_inf = de_trajectory(spec, epsilon, t).Pb_inf[t]
    return SimEstimate(
        n=n,
        epsilon=epsilon,
        t=t,
        trials=count,
        pb_hat=min(1.0, max(0.0, pb_hat)),
        stderr=stderr,
        pb_inf=pb_inf,
        scaled_gap=n * (pb_hat - pb_inf),
        scaled_stderr=n * stderr,
        seed=seed,
    )


__all__ = [
    "realize_degree_sequence",
    "sample_graph",
    "bp_decode",
    "estimate_pb",
]
