from __future__ import annotations

import pytest

from src.framework.errors import ErrorCode, InputError
from src.schemas.evolution_schema import GenArgs
from src.tools.density_evolution_tools import de_trajectory
from src.tools.oracle_tools import beta_oracle, enumerate_trees
from src.tools.tree_correction_tools import (
    beta,
    gen_eval,
    gen_factorial_moment,
    mean_tree_edges,
    moments_agree,
)

EPSILONS = [round(0.1 * k, 1) for k in range(1, 10)]


@pytest.mark.parametrize("eps", [0.0, 0.3, 0.9])
def test_beta_vanishes_without_iterations(fig1, eps):
    assert beta(fig1, eps, 0).beta == 0.0


@pytest.mark.parametrize("t", [1, 3, 8])
def test_beta_vanishes_without_erasures(fig1, t):
    assert beta(fig1, 0.0, t).beta == 0.0


@pytest.mark.parametrize("t, edges", [(0, 0), (1, 18), (2, 198)])
def test_mean_tree_edges_regular(regular_3_6, t, edges):
    assert mean_tree_edges(regular_3_6, t) == pytest.approx(edges)


@pytest.mark.parametrize("t", [0, 1, 4])
@pytest.mark.parametrize("eps", [0.2, 0.7])
def test_generating_function_at_one_is_bit_erasure_rate(toy2, t, eps):
    args = GenArgs.uniform(1.0, toy2.lambda_, toy2.rho)
    assert gen_eval(toy2, eps, t, args) == pytest.approx(de_trajectory(toy2, eps, t).Pb_inf[t], abs=1e-14)


@pytest.mark.parametrize("t", [1, 2, 3, 4, 5])
@pytest.mark.parametrize("eps", EPSILONS)
def test_moments_match_finite_differences(fig1, t, eps):
    closed = beta(fig1, eps, t)
    assert moments_agree(closed.E_KK, gen_factorial_moment(fig1, eps, t, "K"))
    for degree, value in closed.E_VV.items():
        assert moments_agree(value, gen_factorial_moment(fig1, eps, t, "V", degree))
    for degree, value in closed.E_CC.items():
        assert moments_agree(value, gen_factorial_moment(fig1, eps, t, "C", degree))


@pytest.mark.parametrize("t", [1, 2])
@pytest.mark.parametrize("eps", EPSILONS)
def test_beta_matches_enumeration_toy(toy, t, eps):
    trees = _trees(toy, t)
    assert beta(toy, eps, t).beta == pytest.approx(beta_oracle(toy, eps, t, trees=trees), abs=1e-9)


@pytest.mark.parametrize("t", [1, 2])
@pytest.mark.parametrize("eps", EPSILONS)
def test_beta_matches_enumeration_toy2(toy2, t, eps):
    trees = _trees(toy2, t)
    assert beta(toy2, eps, t).beta == pytest.approx(beta_oracle(toy2, eps, t, trees=trees), abs=1e-9)


_TREE_CACHE = {}


def _trees(spec, t):
    key = (spec.name, t)
    if key not in _TREE_CACHE:
        _TREE_CACHE[key] = enumerate_trees(spec, t)
    return _TREE_CACHE[key]


def test_short_trajectory_rejected(fig1):
    with pytest.raises(InputError) as info:
        beta(fig1, 0.5, 4, traj=de_trajectory(fig1, 0.5, 3))
    assert info.value.code == ErrorCode.TRAJECTORY_TOO_SHORT


def test_mismatched_trajectory_rejected(fig1):
    with pytest.raises(InputError) as info:
        beta(fig1, 0.5, 2, traj=de_trajectory(fig1, 0.4, 3))
    assert info.value.code == ErrorCode.INVALID_ARGUMENT


def test_unknown_marker(fig1):
    with pytest.raises(InputError):
        gen_factorial_moment(fig1, 0.5, 2, "Q")
    with pytest.raises(InputError):
        gen_factorial_moment(fig1, 0.5, 2, "V", degree=7)


def test_non_finite_marker_rejected(fig1):
    with pytest.raises(InputError):
        gen_eval(fig1, 0.5, 2, GenArgs(y={2: float("nan")}))
