"""
Brute-force ground truth for the correction terms.

Nothing here reuses the recursions of ``tree_correction_tools`` or the decoder of
``simulation_tools``: trees are enumerated explicitly, root erasure is propagated
leaf to root, and finite graphs are decoded over every erasure subset at once.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from fractions import Fraction
from functools import lru_cache
from itertools import combinations_with_replacement
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import polynomial as npoly

from src.framework.errors import ErrorCode, InputError
from src.framework.parallel import chunk_ranges, parallel_map
from src.schemas.ensemble_schema import DegreeProfile, EnsembleSpec
from src.schemas.graph_schema import NeighborhoodGraph, TannerGraphInstance
from src.schemas.simulation_schema import AlphaEstimate, BlocklengthAverage
from src.tools.density_evolution_tools import check_epsilon, de_trajectory
from src.tools.simulation_tools import realize_degree_sequence, sample_graph

logger = logging.getLogger(__name__)

Number = Union[float, Fraction]

MAX_ENUMERATION_DEPTH = 2
MAX_EXACT_BLOCKLENGTH = 16
DEFAULT_MAX_NODES = 200_000
DEFAULT_BOOTSTRAP = 200
MAX_FIT_POINTS = 3

# Per-graph unrecovered profiles keyed by (lambda, rho, n, t, graphs, seed)
_PROFILE_CACHE: Dict[tuple, np.ndarray] = {}


# --------------------------------------------------------------------------
# Tree enumeration
# --------------------------------------------------------------------------

class _Subtree(NamedTuple):
    structure: tuple
    multiplicity: int
    v_counts: Tuple[Tuple[int, int], ...]
    c_counts: Tuple[Tuple[int, int], ...]
    edges: int


def _merge_counts(parts: Sequence[Tuple[Tuple[int, int], ...]], extra: Optional[int] = None) -> Tuple[Tuple[int, int], ...]:
    total: Counter = Counter()
    for part in parts:
        total.update(dict(part))
    if extra is not None:
        total[extra] += 1
    return tuple(sorted(total.items()))


def _arrangements(children: Sequence[_Subtree]) -> int:
    """Ordered labelings of a multiset of children times their own multiplicities."""
    count = math.factorial(len(children))
    for reps in Counter(child.structure for child in children).values():
        count //= math.factorial(reps)
    for child in children:
        count *= child.multiplicity
    return count


def _multiset_count(kinds: int, size: int) -> int:
    return math.comb(kinds + size - 1, size) if kinds else 0


def _guard_size(count: int, max_nodes: int, layer: str) -> None:
    if count > max_nodes:
        raise InputError(
            ErrorCode.ENUMERATION_TOO_LARGE,
            f"{layer} layer would hold {count} canonical subtrees (cap {max_nodes}).",
            detail={"count": count, "cap": max_nodes},
        )


def _build_layer(
    parents: Sequence[int],
    arity_offset: int,
    children: List[_Subtree],
    parent_is_check: bool,
    max_nodes: int,
    layer: str,
) -> List[_Subtree]:
    expected = sum(_multiset_count(len(children), d - arity_offset) for d in parents)
    _guard_size(expected, max_nodes, layer)

    built: List[_Subtree] = []
    for degree in parents:
        for combo in combinations_with_replacement(children, degree - arity_offset):
            ordered = sorted(combo, key=lambda c: c.structure)
            built.append(
                _Subtree(
                    structure=(degree, tuple(c.structure for c in ordered)),
                    multiplicity=_arrangements(ordered),
                    v_counts=_merge_counts(
                        [c.v_counts for c in ordered], None if parent_is_check else degree
                    ),
                    c_counts=_merge_counts(
                        [c.c_counts for c in ordered], degree if parent_is_check else None
                    ),
                    edges=len(ordered) + sum(c.edges for c in ordered),
                )
            )
    return built


def enumerate_trees(spec: EnsembleSpec, t: int, max_nodes: int = DEFAULT_MAX_NODES) -> List[NeighborhoodGraph]:
    """
    Every depth-t tree neighbourhood in canonical form.

    Built bottom-up: leaf variables, then check subtrees over multisets of the layer
    below, then variable subtrees over check subtrees, and finally the root, which
    takes ``u`` checks instead of ``u - 1``.
    """
    if t < 0 or t > MAX_ENUMERATION_DEPTH:
        raise InputError(
            ErrorCode.INVALID_ARGUMENT, f"tree enumeration supports 0 <= t <= {MAX_ENUMERATION_DEPTH}, got {t}."
        )

    var_degrees = sorted(spec.lambda_)
    chk_degrees = sorted(spec.rho)

    if t == 0:
        roots = [_Subtree((u, ()), 1, (), (), 0) for u in sorted(spec.L)]
    else:
        variables = [_Subtree((i, ()), 1, ((i, 1),), (), 0) for i in var_degrees]
        for level in range(t, 0, -1):
            checks = _build_layer(chk_degrees, 1, variables, True, max_nodes, f"check level {level}")
            if level > 1:
                variables = _build_layer(var_degrees, 1, checks, False, max_nodes, f"variable level {level - 1}")
        roots = _build_layer(sorted(spec.L), 0, checks, False, max_nodes, "root")

    graphs: List[NeighborhoodGraph] = []
    for root in roots:
        u = root.structure[0]
        v_counts = dict(root.v_counts)
        if t > 0:
            v_counts[u] -= 1
        v_counts = {d: c for d, c in v_counts.items() if c > 0}
        graphs.append(
            NeighborhoodGraph(
                depth=t,
                root_degree=u,
                structure=root.structure,
                v_counts=v_counts,
                c_counts=dict(root.c_counts),
                k=root.edges,
                cycles=0,
                multiplicity=root.multiplicity,
            )
        )

    logger.info("[oracle] Enumerated %d canonical trees of depth %d", len(graphs), t)
    return graphs


# --------------------------------------------------------------------------
# Graph probabilities
# --------------------------------------------------------------------------

def _masses(spec: EnsembleSpec, exact: bool):
    if exact:
        if not spec.is_exact:
            raise InputError(ErrorCode.INVALID_ARGUMENT, "exact arithmetic needs an ensemble parsed in exact mode.")
        return spec.exact_lambda, spec.exact_rho, spec.exact_L
    return spec.lambda_, spec.rho, spec.L


def _average_degree(spec: EnsembleSpec, exact: bool) -> Number:
    lam, _, _ = _masses(spec, exact)
    inverse = sum((mass / degree for degree, mass in lam.items()), Fraction(0) if exact else 0.0)
    return 1 / inverse


def p_inf_of_graph(g: NeighborhoodGraph, spec: EnsembleSpec, exact: bool = False) -> Number:
    """Limit probability multiplicity * L_u * prod lambda_i^v_i * prod rho_j^c_j."""
    lam, rho, node = _masses(spec, exact)
    value = g.multiplicity * node.get(g.root_degree, 0)
    for degree, count in g.v_counts.items():
        value *= lam.get(degree, 0) ** count
    for degree, count in g.c_counts.items():
        value *= rho.get(degree, 0) ** count
    return value


def pn_of_graph(g: NeighborhoodGraph, spec: EnsembleSpec, n: int, exact: bool = False) -> Number:
    """
    Finite-n probability of a neighbourhood graph. With E = n L'(1), degree-i
    variables other than the root draw from E lambda_i - i*l sockets, starting past
    the root's own slot when the root has degree i.
    """
    lam, rho, node = _masses(spec, exact)
    sockets = n * _average_degree(spec, exact)
    if g.k >= sockets:
        raise InputError(
            ErrorCode.N_TOO_SMALL, f"graph reveals {g.k} edges but E = {float(sockets):.6g} at n={n}."
        )

    value: Number = g.multiplicity * node.get(g.root_degree, 0)
    for degree, count in g.v_counts.items():
        start = 1 if degree == g.root_degree else 0
        for l in range(start, start + count):
            value *= sockets * lam.get(degree, 0) - degree * l
    for degree, count in g.c_counts.items():
        for l in range(count):
            value *= sockets * rho.get(degree, 0) - degree * l
    for l in range(g.k):
        value /= sockets - l
    return value


def finite_size_ratio(g: NeighborhoodGraph, spec: EnsembleSpec, n: int) -> float:
    """P_n(G) / P_inf(G) for a tree, as a product of factors close to one."""
    if not g.is_tree:
        raise InputError(ErrorCode.NOT_A_TREE, "the ratio to the limit probability needs a tree.")
    sockets = n * _average_degree(spec, False)
    if g.k >= sockets:
        raise InputError(ErrorCode.N_TOO_SMALL, f"graph reveals {g.k} edges but E = {sockets:.6g}.")

    log_ratio = 0.0
    for degree, count in g.v_counts.items():
        start = 1 if degree == g.root_degree else 0
        share = sockets * spec.lambda_[degree]
        for l in range(start, start + count):
            log_ratio += math.log1p(-degree * l / share)
    for degree, count in g.c_counts.items():
        share = sockets * spec.rho[degree]
        for l in range(count):
            log_ratio += math.log1p(-degree * l / share)
    for l in range(g.k):
        log_ratio -= math.log1p(-l / sockets)
    return math.exp(log_ratio)


def beta_coefficient(g: NeighborhoodGraph, spec: EnsembleSpec, exact: bool = False) -> Number:
    """lim n (P_n(G)/P_inf(G) - 1), with the root counted among the variables."""
    lam, rho, _ = _masses(spec, exact)
    zero = Fraction(0) if exact else 0.0
    var_term = sum(
        (Fraction(degree) / lam[degree] if exact else degree / lam[degree]) * v * (v - 1)
        for degree, v in g.variable_totals().items()
    ) + zero
    chk_term = sum(
        (Fraction(degree) / rho[degree] if exact else degree / rho[degree]) * c * (c - 1)
        for degree, c in g.c_counts.items()
    ) + zero
    return (g.k * (g.k - 1) - var_term - chk_term) / (2 * _average_degree(spec, exact))


def single_cycle_graph(
    spec: EnsembleSpec,
    u: int,
    cycle_checks: int,
    check_degree: Optional[int] = None,
    variable_degree: Optional[int] = None,
) -> NeighborhoodGraph:
    """
    Count summary of a neighbourhood with one cycle through the root.

    The cycle passes through ``cycle_checks`` checks and ``cycle_checks - 1``
    intermediate variables (a single check gives a double edge to the root). Every
    remaining check socket ends in a leaf variable.
    """
    check_degree = check_degree or min(spec.rho)
    variable_degree = variable_degree or min(spec.lambda_)
    if u < 2 or u not in spec.L:
        raise InputError(ErrorCode.INVALID_ARGUMENT, f"root degree {u} must be >= 2 and present in L.")
    if cycle_checks < 1:
        raise InputError(ErrorCode.INVALID_ARGUMENT, "a cycle needs at least one check.")
    if cycle_checks > 1 and variable_degree < 2:
        raise InputError(ErrorCode.INVALID_ARGUMENT, "cycle variables need degree >= 2.")

    leaves = cycle_checks * (check_degree - 2)
    v_counts: Counter = Counter()
    v_counts[variable_degree] += (cycle_checks - 1) + leaves
    return NeighborhoodGraph(
        depth=cycle_checks,
        root_degree=u,
        structure=None,
        v_counts={d: c for d, c in v_counts.items() if c > 0},
        c_counts={check_degree: cycle_checks},
        k=cycle_checks * check_degree,
        cycles=1,
        multiplicity=1,
    )


# --------------------------------------------------------------------------
# Root erasure on trees
# --------------------------------------------------------------------------

def pb_of_tree(g: NeighborhoodGraph, epsilon: float) -> float:
    """Exact root erasure probability after ``g.depth`` iterations on a tree."""
    if not g.is_tree:
        raise InputError(ErrorCode.NOT_A_TREE, "root erasure propagation needs a tree neighbourhood.")
    epsilon = check_epsilon(epsilon)

    @lru_cache(maxsize=None)
    def variable_message(node: tuple) -> float:
        value = epsilon
        for check in node[1]:
            value *= check_message(check)
        return value

    @lru_cache(maxsize=None)
    def check_message(node: tuple) -> float:
        known = 1.0
        for variable in node[1]:
            known *= 1.0 - variable_message(variable)
        return 1.0 - known

    return variable_message(g.structure)


def tree_mass(trees: Sequence[NeighborhoodGraph], spec: EnsembleSpec, exact: bool = False) -> Number:
    return sum((p_inf_of_graph(g, spec, exact) for g in trees), Fraction(0) if exact else 0.0)


def mixture_pb(trees: Sequence[NeighborhoodGraph], spec: EnsembleSpec, epsilon: float) -> float:
    """sum_G P_inf(G) P_b(epsilon, G), which equals epsilon L(P_epsilon(t))."""
    return math.fsum(p_inf_of_graph(g, spec) * pb_of_tree(g, epsilon) for g in trees)


def beta_oracle(
    spec: EnsembleSpec,
    epsilon: float,
    t: int,
    *,
    trees: Optional[Sequence[NeighborhoodGraph]] = None,
    max_nodes: int = DEFAULT_MAX_NODES,
) -> float:
    """Tree part of alpha from explicit enumeration: sum_G P_inf(G) c(G) P_b(epsilon, G)."""
    epsilon = check_epsilon(epsilon)
    if trees is None:
        trees = enumerate_trees(spec, t, max_nodes)
    exact = spec.is_exact
    return math.fsum(
        float(p_inf_of_graph(g, spec, exact) * beta_coefficient(g, spec, exact)) * pb_of_tree(g, epsilon)
        for g in trees
    )


# --------------------------------------------------------------------------
# Exact finite-graph evaluation
# --------------------------------------------------------------------------

def unrecovered_profile(g: TannerGraphInstance, t: int) -> np.ndarray:
    """
    ``profile[w]`` is the number of bits left erased after ``t`` iterations, summed
    over all erasure sets of weight ``w``.
    """
    if g.n > MAX_EXACT_BLOCKLENGTH:
        raise InputError(
            ErrorCode.N_TOO_LARGE_FOR_EXACT, f"n={g.n} exceeds {MAX_EXACT_BLOCKLENGTH} for exhaustive evaluation."
        )
    if t < 0:
        raise InputError(ErrorCode.INVALID_ARGUMENT, f"t must be >= 0, got {t}.")

    n = g.n
    subsets = np.arange(1 << n, dtype=np.int64)
    erased = ((subsets[:, None] >> np.arange(n)) & 1).astype(bool)
    weights = erased.sum(axis=1)

    var_of_edge = g.var_of_edge.tolist()
    chk_of_edge = g.chk_of_edge.tolist()
    edges = len(var_of_edge)
    at_check: Dict[int, List[int]] = {}
    at_variable: Dict[int, List[int]] = {}
    for e in range(edges):
        at_check.setdefault(chk_of_edge[e], []).append(e)
        at_variable.setdefault(var_of_edge[e], []).append(e)

    remaining = erased
    if t > 0:
        v2c = [erased[:, var_of_edge[e]] for e in range(edges)]
        c2v: List[np.ndarray] = [None] * edges
        for _ in range(t):
            for e in range(edges):
                out = np.zeros(len(subsets), dtype=bool)
                for other in at_check[chk_of_edge[e]]:
                    if other != e:
                        out |= v2c[other]
                c2v[e] = out
            new_v2c = []
            for e in range(edges):
                out = erased[:, var_of_edge[e]].copy()
                for other in at_variable[var_of_edge[e]]:
                    if other != e:
                        out &= c2v[other]
                new_v2c.append(out)
            v2c = new_v2c

        remaining = erased.copy()
        for v in range(n):
            for e in at_variable.get(v, []):
                remaining[:, v] &= c2v[e]

    return np.bincount(weights, weights=remaining.sum(axis=1), minlength=n + 1)


def pb_from_profile(profile: np.ndarray, epsilon: float) -> float:
    n = profile.size - 1
    w = np.arange(n + 1)
    law = np.power(epsilon, w) * np.power(1.0 - epsilon, n - w)
    return float(np.dot(profile, law) / n)


def exact_pb_finite_graph(g: TannerGraphInstance, epsilon: float, t: int) -> float:
    """Average erased fraction over every erasure pattern, weighted by the channel law."""
    epsilon = check_epsilon(epsilon)
    return pb_from_profile(unrecovered_profile(g, t), epsilon)


# --------------------------------------------------------------------------
# Finite-n extrapolation
# --------------------------------------------------------------------------

def realizable_blocklengths(spec: EnsembleSpec, n_max: int = MAX_EXACT_BLOCKLENGTH) -> List[int]:
    found = []
    for n in range(1, n_max + 1):
        try:
            realize_degree_sequence(spec, n, exact=True)
        except InputError:
            continue
        found.append(n)
    return found


class _ProfileTask(NamedTuple):
    profile: DegreeProfile
    t: int
    seed: int
    start: int
    stop: int


def _profile_chunk(task: _ProfileTask) -> np.ndarray:
    n = task.profile.n
    rows = np.empty((task.stop - task.start, n + 1))
    var_degrees = task.profile.variable_degrees()
    chk_degrees = task.profile.check_degrees()
    for row, sample in enumerate(range(task.start, task.stop)):
        rng = np.random.default_rng([task.seed, n, sample])
        rows[row] = unrecovered_profile(sample_graph(var_degrees, chk_degrees, rng), task.t)
    return rows


def sample_profiles(
    spec: EnsembleSpec, n: int, t: int, graphs: int, seed: int, *, workers: int = 1, chunk_size: int = 256
) -> np.ndarray:
    """Unrecovered profiles of ``graphs`` sampled graphs at blocklength ``n``; cached."""
    if n > MAX_EXACT_BLOCKLENGTH:
        raise InputError(
            ErrorCode.N_TOO_LARGE_FOR_EXACT, f"n={n} exceeds {MAX_EXACT_BLOCKLENGTH} for exhaustive evaluation."
        )
    key = (tuple(sorted(spec.lambda_.items())), tuple(sorted(spec.rho.items())), n, t, graphs, seed)
    if key in _PROFILE_CACHE:
        return _PROFILE_CACHE[key]

    profile = realize_degree_sequence(spec, n, exact=True)
    tasks = [_ProfileTask(profile, t, seed, a, b) for a, b in chunk_ranges(graphs, chunk_size)]
    rows = np.vstack(parallel_map(_profile_chunk, tasks, workers, desc=f"exact n={n}"))
    _PROFILE_CACHE[key] = rows
    return rows


def _fit_gaps(ns: Sequence[int], gaps: Sequence[float]) -> Tuple[float, float]:
    """
    Fit g(n) = alpha + c_1/n + ... + c_{k-1}/n^{k-1} exactly through k points.

    Returns ``(alpha, residual)``; ``residual`` is the highest fitted term at the
    largest n.
    """
    x = 1.0 / np.asarray(ns, dtype=float)
    coef = npoly.polyfit(x, np.asarray(gaps, dtype=float), len(ns) - 1)
    residual = abs(float(coef[-1])) * float(x.min()) ** (len(ns) - 1)
    return float(coef[0]), residual


def alpha_extrapolate(
    spec: EnsembleSpec,
    epsilon: float,
    t: int,
    n_list: Sequence[int],
    graphs_per_n: int,
    seed: int,
    *,
    workers: int = 1,
    confidence: float = 0.95,
    bootstrap: int = DEFAULT_BOOTSTRAP,
) -> AlphaEstimate:
    """
    alpha(epsilon, t) from exact ensemble averages at tiny n.

    g(n) = n (P_b(n) - P_b(inf)) is formed per n. The largest ``MAX_FIT_POINTS`` n
    fix a polynomial in 1/n whose constant term is alpha: two points remove the 1/n
    term of g, three points remove the 1/n^2 term as well.

    The interval is a percentile bootstrap over graphs of the same fit, widened on
    both sides by ``bias``, the highest fitted term at the largest n.
    """
    epsilon = check_epsilon(epsilon)
    ns = sorted(set(n_list))
    if len(ns) < 2:
        raise InputError(ErrorCode.INVALID_ARGUMENT, "extrapolation needs at least two blocklengths.")
    if graphs_per_n < 1:
        raise InputError(ErrorCode.INVALID_ARGUMENT, "graphs_per_n must be >= 1.")

    pb_inf = de_trajectory(spec, epsilon, t).Pb_inf[t]
    per_graph: Dict[int, np.ndarray] = {}
    per_n: List[BlocklengthAverage] = []
    for n in ns:
        profiles = sample_profiles(spec, n, t, graphs_per_n, seed, workers=workers)
        w = np.arange(n + 1)
        law = np.power(epsilon, w) * np.power(1.0 - epsilon, n - w)
        values = profiles @ law / n
        per_graph[n] = values
        mean = float(values.mean())
        stderr = float(values.std(ddof=1) / math.sqrt(values.size)) if values.size > 1 else 0.0
        per_n.append(
            BlocklengthAverage(n=n, graphs=values.size, pb_hat=mean, stderr=stderr, scaled_gap=n * (mean - pb_inf))
        )

    top = ns[-MAX_FIT_POINTS:]
    gap_of = {item.n: item.scaled_gap for item in per_n}
    alpha_hat, bias = _fit_gaps(top, [gap_of[n] for n in top])

    rng = np.random.default_rng([seed, len(ns), bootstrap])
    draws = np.empty(bootstrap)
    for b in range(bootstrap):
        gaps = []
        for n in top:
            values = per_graph[n]
            resampled = values[rng.integers(0, values.size, size=values.size)]
            gaps.append(n * (float(resampled.mean()) - pb_inf))
        draws[b] = _fit_gaps(top, gaps)[0]
    tail = (1.0 - confidence) / 2.0
    ci_low, ci_high = np.quantile(draws, [tail, 1.0 - tail]) if bootstrap else (alpha_hat, alpha_hat)
    ci_low = float(min(ci_low, alpha_hat)) - bias
    ci_high = float(max(ci_high, alpha_hat)) + bias

    logger.info(
        "[oracle] alpha_extrapolate eps=%.3f t=%d n=%s: %.6g [%.6g, %.6g] (bias %.3g)",
        epsilon, t, top, alpha_hat, ci_low, ci_high, bias,
    )
    return AlphaEstimate(
        epsilon=epsilon,
        t=t,
        pb_inf=pb_inf,
        per_n=per_n,
        fit_n=list(top),
        alpha_hat=alpha_hat,
        bias=bias,
        ci_low=ci_low,
        ci_high=ci_high,
        confidence=confidence,
        seed=seed,
    )


__all__ = [
    "enumerate_trees",
    "p_inf_of_graph",
    "pn_of_graph",
    "finite_size_ratio",
    "beta_coefficient",
    "single_cycle_graph",
    "pb_of_tree",
    "tree_mass",
    "mixture_pb",
    "beta_oracle",
    "unrecovered_profile",
    "pb_from_profile",
    "exact_pb_finite_graph",
    "realizable_blocklengths",
    "sample_profiles",
    "alpha_extrapolate",
]
