from __future__ import annotations

import math

import numpy as np
import pytest

from src.framework.errors import ErrorCode, InternalError
from src.tools.cycle_correction_tools import _GammaRecursions, alpha, gamma
from src.tools.density_evolution_tools import de_trajectory
from src.tools.ensemble_tools import build_ensemble
from src.tools.tree_correction_tools import beta

EPSILONS = [round(0.1 * k, 1) for k in range(0, 10)]


@pytest.mark.parametrize("name", ["fig1", "toy", "toy2"])
@pytest.mark.parametrize("eps", EPSILONS)
def test_alpha_vanishes_at_zero_iterations(name, eps, request):
    spec = request.getfixturevalue(name)
    parts = alpha(spec, eps, 0)
    assert parts.beta == pytest.approx(0.0, abs=1e-12)
    assert parts.gamma == pytest.approx(0.0, abs=1e-12)
    assert parts.alpha == pytest.approx(0.0, abs=1e-12)


def test_gamma_vanishes_without_erasures(fig1):
    assert gamma(fig1, 0.0, 6).gamma == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("t", [1, 2, 5, 20, 50])
def test_gamma_finite_over_long_runs(fig1, t):
    for eps in (0.3, 0.6, 0.8, 0.95):
        assert math.isfinite(gamma(fig1, eps, t).gamma)


@pytest.mark.parametrize("t", [1, 3])
def test_alpha_is_beta_plus_gamma(toy, t):
    parts = alpha(toy, 0.6, t)
    assert parts.beta == pytest.approx(beta(toy, 0.6, t).beta, abs=1e-15)
    assert parts.gamma == pytest.approx(gamma(toy, 0.6, t).gamma, abs=1e-15)
    assert parts.alpha == pytest.approx(parts.beta + parts.gamma, abs=1e-15)


def test_variable_cycles_need_second_derivative(cycle_code):
    # lambda''(1) = 0 for degree-two variables only
    state = gamma(cycle_code, 0.4, 4)
    assert state.sum_Fv == 0.0
    assert state.gamma == pytest.approx(state.sum_Fc + state.sum_Fr)


@pytest.mark.parametrize("t", [1, 3, 6])
def test_check_cycles_need_second_derivative(t):
    # rho''(1) = 0 for degree-two checks only
    spec = build_ensemble({3: 1.0}, {2: 1.0})
    state = gamma(spec, 0.4, t)
    assert state.sum_Fc == 0.0
    assert state.gamma == pytest.approx(state.sum_Fv + state.sum_Fr)


@pytest.mark.parametrize(
    "helper, args",
    [
        ("f", (-1, 0)),
        ("f", (2, 0)),
        ("g", (1, -1)),
        ("G1", (0, -1)),
        ("G2", (-1, 2)),
        ("G3", (-2, 0)),
        ("r", (0,)),
    ],
)
def test_helpers_reject_negative_indices(toy, helper, args):
    rec = _GammaRecursions(toy, 0.5, de_trajectory(toy, 0.5, 4))
    with pytest.raises(InternalError) as info:
        getattr(rec, helper)(*args)
    assert info.value.code == ErrorCode.INDEX_DOMAIN_VIOLATION
    assert not rec.f_table and not rec.g_table


def test_affine_memo_base_case(toy):
    state = gamma(toy, 0.45, 3)
    for (tau, s), (a, b) in state.f_table.items():
        if tau == 0:
            assert (a, b) == (0.45, 0.0)
    for (tau, s), (a, b) in state.g_table.items():
        if s == 0:
            assert (a, b) == (0.0, 1.0)


def test_excluding_gamma(toy):
    parts = alpha(toy, 0.6, 2, include_gamma=False)
    assert parts.gamma == 0.0
    assert parts.alpha == parts.beta


def test_alpha_peaks_near_threshold(fig1):
    """The t = 50 curve is largest in magnitude close to the threshold."""
    grid = np.round(np.arange(0.3, 0.99, 0.005), 3)
    values = np.array([abs(alpha(fig1, float(eps), 50).alpha) for eps in grid])
    peak = float(grid[int(np.argmax(values))])
    assert 0.75 <= peak <= 0.85
    at_half = abs(alpha(fig1, 0.5, 50).alpha)
    assert values.max() >= 10 * at_half
