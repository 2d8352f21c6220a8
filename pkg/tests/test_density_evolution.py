from __future__ import annotations

import numpy as np
import pytest

from src.framework.errors import ErrorCode, InputError
from src.tools.density_evolution_tools import bp_threshold, de_fixed_point, de_trajectory


def test_first_iteration_regular(regular_3_6):
    traj = de_trajectory(regular_3_6, 0.4, 1)
    assert traj.P[0] == 1.0
    assert traj.Q[0] == 0.4
    assert traj.Q[1] == pytest.approx(0.4)
    assert traj.P[1] == pytest.approx(0.92224, abs=1e-12)
    assert traj.Pb_inf[0] == pytest.approx(0.4)
    assert traj.Pb_inf[1] == pytest.approx(0.4 * 0.92224**3, abs=1e-12)
    assert len(traj.Q) == traj.T + 2


@pytest.mark.parametrize("name", ["fig1", "toy", "toy2", "regular_3_6"])
def test_trajectory_monotone_and_bounded(name, request):
    spec = request.getfixturevalue(name)
    for eps in np.linspace(0.0, 1.0, 11):
        traj = de_trajectory(spec, float(eps), 30)
        assert all(0.0 <= p <= 1.0 for p in traj.P)
        assert all(b <= a + 1e-15 for a, b in zip(traj.P, traj.P[1:]))


def test_zero_and_full_erasure(fig1):
    assert de_trajectory(fig1, 0.0, 5).Pb_inf == [0.0] * 6
    assert de_trajectory(fig1, 1.0, 5).P == [1.0] * 6


def test_rejects_bad_epsilon(fig1):
    with pytest.raises(InputError) as info:
        de_trajectory(fig1, 1.2, 3)
    assert info.value.code == ErrorCode.EPSILON_OUT_OF_RANGE


def test_fixed_point(regular_3_6):
    assert de_fixed_point(regular_3_6, 0.3) == 0.0
    assert de_fixed_point(regular_3_6, 0.5) > 0.5


def test_threshold_regular(regular_3_6):
    assert bp_threshold(regular_3_6) == pytest.approx(0.4294, abs=1e-3)


def test_threshold_fig1(fig1):
    assert bp_threshold(fig1) == pytest.approx(0.80, abs=0.01)


def test_threshold_cycle_code(cycle_code):
    assert bp_threshold(cycle_code) == pytest.approx(0.5, abs=1e-3)


def test_threshold_rejects_bad_tolerance(fig1):
    with pytest.raises(InputError):
        bp_threshold(fig1, tol=0.0)
