from __future__ import annotations

from typing import List

import numpy as np
import pytest

from src.schemas.ensemble_schema import Distribution
from src.schemas.evolution_schema import GenArgs
from src.tools.density_evolution_tools import MAX_DE_ITERATIONS, _descending, _iterate_to_limit, de_trajectory
from src.tools.ensemble_tools import build_ensemble, poly_eval
from src.tools.oracle_tools import enumerate_trees, mixture_pb, tree_mass
from src.tools.simulation_tools import (
    _ChunkTask,
    _simulate_chunk,
    bp_decode,
    realize_degree_sequence,
    sample_graph,
)
from src.tools.tree_correction_tools import beta, gen_eval, gen_factorial_moment, moments_agree

CASES = 1000
SEED = 20240611
MIN_MASS = 0.05
GRID = [round(0.1 * k, 1) for k in range(1, 10)]


def _masses(rng: np.random.Generator, low: int, high: int) -> dict:
    size = min(int(rng.integers(1, 4)), high - low + 1)
    support = rng.choice(np.arange(low, high + 1), size=size, replace=False)
    free = 1.0 - MIN_MASS * support.size
    weights = MIN_MASS + free * rng.dirichlet(np.ones(support.size))
    return dict(zip(support.tolist(), weights.tolist()))


def random_ensemble(rng: np.random.Generator, max_var: int = 6, max_chk: int = 8):
    return build_ensemble(_masses(rng, 2, max_var), _masses(rng, 3, max_chk))


def _cases():
    for case in range(CASES):
        yield case, np.random.default_rng([SEED, case])


#########################
# Density evolution
#########################

def test_trajectories_monotone_in_iterations_and_channel():
    violations: List[str] = []
    for case, rng in _cases():
        spec = random_ensemble(rng)
        low, high = sorted(rng.uniform(0.0, 1.0, size=2).tolist())
        a = de_trajectory(spec, low, 20)
        b = de_trajectory(spec, high, 20)
        for traj in (a, b):
            if not all(0.0 <= p <= 1.0 for p in traj.P + traj.Q):
                violations.append(f"case {case}: entry outside [0, 1]")
            if any(y > x + 1e-15 for x, y in zip(traj.P, traj.P[1:])):
                violations.append(f"case {case}: P increases in tau")
            if any(y > x + 1e-15 for x, y in zip(traj.Q[1:], traj.Q[2:])):
                violations.append(f"case {case}: Q increases in tau")
        if any(p > q + 1e-15 for p, q in zip(a.P, b.P)):
            violations.append(f"case {case}: P decreases in epsilon")
        if any(p > q + 1e-15 for p, q in zip(a.Q, b.Q)):
            violations.append(f"case {case}: Q decreases in epsilon")
    assert violations == []


def test_fixed_point_residual():
    violations: List[str] = []
    settled = 0
    for case, rng in _cases():
        spec = random_ensemble(rng)
        eps = float(rng.uniform(0.0, 1.0))
        _, p, iterations = _iterate_to_limit(
            _descending(spec, Distribution.LAMBDA), _descending(spec, Distribution.RHO), eps, MAX_DE_ITERATIONS
        )
        if iterations >= MAX_DE_ITERATIONS:
            continue
        settled += 1
        image = 1.0 - poly_eval(spec, "rho", 0, 1.0 - eps * poly_eval(spec, "lambda", 0, p))
        if abs(p - image) >= 1e-10:
            violations.append(f"case {case}: eps={eps:.6f} residual {abs(p - image):.3g}")
    assert violations == []
    assert settled >= CASES // 2


#########################
# Polynomials
#########################

@pytest.mark.parametrize("which", ["lambda", "rho", "L"])
def test_derivatives_match_central_differences(which):
    h = 1e-6
    violations: List[str] = []
    for case, rng in _cases():
        spec = random_ensemble(rng)
        for x in GRID:
            for order in (1, 2):
                closed = poly_eval(spec, which, order, x)
                above = poly_eval(spec, which, order - 1, x + h)
                below = poly_eval(spec, which, order - 1, x - h)
                fd = (above - below) / (2 * h)
                if abs(closed - fd) > 1e-6 * max(1.0, abs(closed)):
                    violations.append(f"case {case}: order {order} at x={x}: {closed} vs {fd}")
    assert violations == []


#########################
# Trees
#########################

def test_tree_mass_and_mixture_identities():
    violations: List[str] = []
    for case, rng in _cases():
        spec = random_ensemble(rng, max_var=3, max_chk=4)
        t = int(rng.integers(0, 2))
        eps = float(rng.uniform(0.0, 1.0))
        trees = enumerate_trees(spec, t)
        mass = tree_mass(trees, spec)
        if abs(mass - 1.0) > 1e-12:
            violations.append(f"case {case}: t={t} mass {mass!r}")
        expected = de_trajectory(spec, eps, t).Pb_inf[t]
        mixed = mixture_pb(trees, spec, eps)
        if abs(mixed - expected) > 1e-12:
            violations.append(f"case {case}: t={t} eps={eps:.6f} mixture {mixed!r} vs {expected!r}")
    assert violations == []


def test_beta_moments_match_generating_function():
    violations: List[str] = []
    for case, rng in _cases():
        spec = random_ensemble(rng, max_var=5, max_chk=6)
        t = int(rng.integers(1, 3))
        eps = float(rng.uniform(0.05, 0.95))

        at_one = gen_eval(spec, eps, t, GenArgs.uniform(1.0, spec.lambda_, spec.rho))
        if abs(at_one - de_trajectory(spec, eps, t).Pb_inf[t]) > 1e-13:
            violations.append(f"case {case}: generating function at one is {at_one!r}")

        closed = beta(spec, eps, t)
        checks = [("K", None, closed.E_KK)]
        checks += [("V", d, v) for d, v in closed.E_VV.items()]
        checks += [("C", d, v) for d, v in closed.E_CC.items()]
        for marker, degree, value in checks:
            fd = gen_factorial_moment(spec, eps, t, marker, degree)
            if not moments_agree(value, fd):
                violations.append(f"case {case}: {marker}{degree or ''} t={t} eps={eps:.4f}: {value} vs {fd}")
    assert violations == []


#########################
# Decoder and simulation
#########################

def _random_degrees(rng: np.random.Generator, n: int):
    var_degrees = rng.integers(2, 6, size=n).tolist()
    remaining = sum(var_degrees)
    chk_degrees = []
    while remaining > 0:
        d = min(int(rng.integers(3, 7)), remaining)
        chk_degrees.append(d)
        remaining -= d
    return var_degrees, chk_degrees


def test_decoder_monotone():
    violations: List[str] = []
    for case, rng in _cases():
        var_degrees, chk_degrees = _random_degrees(rng, int(rng.integers(5, 60)))
        g = sample_graph(var_degrees, chk_degrees, rng)
        small = rng.random(g.n) < rng.uniform(0.0, 0.8)
        large = small | (rng.random(g.n) < 0.3)
        t = int(rng.integers(0, 10))
        if bp_decode(g, small, t) > bp_decode(g, large, t):
            violations.append(f"case {case}: more erasures recovered more bits")
        if bp_decode(g, large, t + 1) > bp_decode(g, large, t):
            violations.append(f"case {case}: an extra iteration lost bits")
        if bp_decode(g, large, t) > int(large.sum()):
            violations.append(f"case {case}: decoder erased a known bit")
    assert violations == []


def test_chunks_reproducible_and_split_invariant(toy):
    profile = realize_degree_sequence(toy, 20)
    var_degrees, chk_degrees = tuple(profile.variable_degrees()), tuple(profile.check_degrees())
    violations: List[str] = []
    for case, rng in _cases():
        eps = float(rng.uniform(0.0, 1.0))
        t = int(rng.integers(0, 8))
        seed = int(rng.integers(0, 2**32))
        start = int(rng.integers(0, 1000))
        split = start + int(rng.integers(1, 6))
        stop = split + int(rng.integers(1, 6))

        whole = _ChunkTask(var_degrees, chk_degrees, eps, t, seed, start, stop)
        first = _simulate_chunk(whole)
        if first != _simulate_chunk(whole):
            violations.append(f"case {case}: chunk not reproducible")

        left = _simulate_chunk(_ChunkTask(var_degrees, chk_degrees, eps, t, seed, start, split))
        right = _simulate_chunk(_ChunkTask(var_degrees, chk_degrees, eps, t, seed, split, stop))
        if left[0] + right[0] != first[0] or abs(left[1] + right[1] - first[1]) > 1e-12:
            violations.append(f"case {case}: chunk boundary changed the result")
    assert violations == []
