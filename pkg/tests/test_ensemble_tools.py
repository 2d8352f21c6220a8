from __future__ import annotations

import json
from fractions import Fraction

import pytest

from src.framework.errors import ErrorCode, InputError
from src.schemas.ensemble_schema import Distribution
from src.tools.ensemble_tools import (
    average_variable_degree,
    build_ensemble,
    design_rate,
    load_ensemble,
    parse_ensemble,
    poly_eval,
    stability_bound,
)


def test_regular_ensemble_derivatives(regular_3_6):
    assert regular_3_6.L == {3: 1.0}
    assert poly_eval(regular_3_6, "lambda", 0, 0.5) == pytest.approx(0.25)
    assert poly_eval(regular_3_6, "rho", 1, 1.0) == pytest.approx(5.0)
    assert poly_eval(regular_3_6, "rho", 2, 1.0) == pytest.approx(20.0)
    assert average_variable_degree(regular_3_6) == pytest.approx(3.0)
    assert design_rate(regular_3_6) == pytest.approx(0.5)


def test_node_perspective(toy):
    # lambda_i / i = 1/4, 1/6
    assert toy.L[2] == pytest.approx(0.6)
    assert toy.L[3] == pytest.approx(0.4)
    assert sum(toy.L.values()) == pytest.approx(1.0, abs=1e-15)
    assert poly_eval(toy, Distribution.L, 1, 1.0) == pytest.approx(2.4)


@pytest.mark.parametrize("x", [0.0, 0.25, 0.5, 1.0])
def test_edge_perspective_is_normalised_derivative_of_L(fig1, x):
    lam = poly_eval(fig1, "lambda", 0, x)
    ratio = poly_eval(fig1, "L", 1, x) / poly_eval(fig1, "L", 1, 1.0)
    assert lam == pytest.approx(ratio, rel=1e-12, abs=1e-15)


def test_stability_bound(fig1, toy2):
    # 1 / (0.5 * (2*0.492 + 3*0.508))
    assert stability_bound(fig1) == pytest.approx(1.0 / (0.5 * 2.508))
    assert stability_bound(toy2) == float("inf")


@pytest.mark.parametrize(
    "lam, rho, code",
    [
        ({"1": 1.0}, {"3": 1.0}, ErrorCode.DEGREE_BELOW_TWO),
        ({"2": -0.5, "3": 1.5}, {"3": 1.0}, ErrorCode.NEGATIVE_MASS),
        ({"2": 0.0}, {"3": 1.0}, ErrorCode.EMPTY_DISTRIBUTION),
        ({"2": 0.5, "3": 0.6}, {"3": 1.0}, ErrorCode.SUM_NOT_ONE),
        ({"two": 1.0}, {"3": 1.0}, ErrorCode.MALFORMED_CONFIG),
        ({"2": "half"}, {"3": 1.0}, ErrorCode.MALFORMED_CONFIG),
        ({"2": float("nan"), "3": 1.0}, {"3": 1.0}, ErrorCode.MALFORMED_CONFIG),
        ({"2": 1.0}, {"3": float("inf")}, ErrorCode.MALFORMED_CONFIG),
    ],
)
def test_validation_errors(lam, rho, code):
    with pytest.raises(InputError) as info:
        build_ensemble(lam, rho)
    assert info.value.code == code


@pytest.mark.parametrize("exact", [False, True])
@pytest.mark.parametrize("literal", ["NaN", "Infinity", "-Infinity"])
def test_non_finite_json_masses_rejected(literal, exact):
    text = '{"lambda": {"2": ' + literal + ', "3": 1.0}, "rho": {"3": 1.0}}'
    with pytest.raises(InputError) as info:
        parse_ensemble(text, exact=exact)
    assert info.value.code == ErrorCode.MALFORMED_CONFIG


def test_small_rounding_is_renormalised():
    spec = build_ensemble({"2": 0.5, "3": 0.5 + 1e-12}, {"3": 1.0})
    assert sum(spec.lambda_.values()) == pytest.approx(1.0, abs=1e-15)


def test_poly_eval_rejects_out_of_range(toy):
    with pytest.raises(InputError) as info:
        poly_eval(toy, "rho", 0, 1.5)
    assert info.value.code == ErrorCode.X_OUT_OF_RANGE
    with pytest.raises(InputError):
        poly_eval(toy, "rho", 3, 0.5)


def test_parse_errors():
    with pytest.raises(InputError) as info:
        parse_ensemble("{not json")
    assert info.value.code == ErrorCode.MALFORMED_CONFIG
    with pytest.raises(InputError) as info:
        parse_ensemble(json.dumps({"lambda": {"2": 1.0}}))
    assert info.value.code == ErrorCode.MALFORMED_CONFIG


def test_exact_mode_keeps_fractions():
    spec = parse_ensemble(json.dumps({"lambda": {"2": 0.5, "3": 0.5}, "rho": {"3": 1.0}}), exact=True)
    assert spec.is_exact
    assert spec.exact_L == {2: Fraction(3, 5), 3: Fraction(2, 5)}


def test_load_by_name_and_missing_file(tmp_path):
    assert load_ensemble("fig1").name == "fig1"
    with pytest.raises(InputError) as info:
        load_ensemble(tmp_path / "nope.json")
    assert info.value.code == ErrorCode.MALFORMED_CONFIG
