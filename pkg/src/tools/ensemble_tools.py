from __future__ import annotations

import json
import logging
import math
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

from numpy.polynomial import polynomial as npoly

from src.framework.errors import ErrorCode, InputError
from src.schemas.ensemble_schema import Distribution, EnsembleSpec

logger = logging.getLogger(__name__)

NORMALIZATION_TOLERANCE = 1e-9
RANGE_SLACK = 1e-12

Number = Union[float, Fraction]

# Parsed ensembles keyed by (resolved path, exact)
_ENSEMBLE_CACHE: Dict[tuple[str, bool], EnsembleSpec] = {}


def _get_data_dir() -> Path:
    """Directory holding the shipped ensemble configs."""
    tools_dir = Path(__file__).resolve().parent
    project_root = tools_dir.parent.parent
    return project_root / "data" / "ensembles"


def _validate_distribution(label: str, raw: Any) -> Dict[int, Number]:
    """Check one degree->mass map and renormalise it to sum to exactly one."""
    if not isinstance(raw, Mapping):
        raise InputError(ErrorCode.MALFORMED_CONFIG, f"'{label}' must be a degree -> mass map.")

    masses: Dict[int, Number] = {}
    for key, value in raw.items():
        try:
            degree = int(key)
        except (TypeError, ValueError):
            raise InputError(ErrorCode.MALFORMED_CONFIG, f"'{label}' has non-integer degree {key!r}.")
        if str(degree) != str(key).strip():
            raise InputError(ErrorCode.MALFORMED_CONFIG, f"'{label}' has non-integer degree {key!r}.")
        if isinstance(value, bool) or not isinstance(value, (int, float, Fraction)):
            raise InputError(ErrorCode.MALFORMED_CONFIG, f"'{label}[{degree}]' is not a number.")
        if not math.isfinite(value):
            raise InputError(ErrorCode.MALFORMED_CONFIG, f"'{label}[{degree}]' = {value} is not finite.")
        if degree < 2:
            raise InputError(
                ErrorCode.DEGREE_BELOW_TWO, f"'{label}' has degree {degree}; degrees must be >= 2."
            )
        if value < 0:
            raise InputError(ErrorCode.NEGATIVE_MASS, f"'{label}[{degree}]' = {value} is negative.")
        if value > 0:
            masses[degree] = masses.get(degree, 0) + value

    if not masses:
        raise InputError(ErrorCode.EMPTY_DISTRIBUTION, f"'{label}' has no positive mass.")

    total = sum(masses.values())
    if abs(total - 1) > NORMALIZATION_TOLERANCE:
        raise InputError(
            ErrorCode.SUM_NOT_ONE,
            f"'{label}' sums to {float(total):.12g}; deviation exceeds {NORMALIZATION_TOLERANCE}.",
        )
    return {degree: masses[degree] / total for degree in sorted(masses)}


def _node_perspective(edge_masses: Dict[int, Number]) -> Dict[int, Number]:
    """L_i = (lambda_i / i) / sum_k (lambda_k / k)."""
    scaled = {degree: mass / degree for degree, mass in edge_masses.items()}
    norm = sum(scaled.values())
    return {degree: value / norm for degree, value in scaled.items()}


def _rational(value: Any) -> Any:
    if isinstance(value, float) and math.isfinite(value):
        return Fraction(str(value))
    return value


def build_ensemble(
    lambda_: Mapping[Any, Any],
    rho: Mapping[Any, Any],
    *,
    name: Optional[str] = None,
    exact: bool = False,
) -> EnsembleSpec:
    """Validate degree distributions and derive the node-perspective masses."""
    if exact:
        lambda_ = {k: _rational(v) for k, v in lambda_.items()}
        rho = {k: _rational(v) for k, v in rho.items()}

    lam = _validate_distribution("lambda", lambda_)
    rh = _validate_distribution("rho", rho)
    node_l = _node_perspective(lam)
    node_r = _node_perspective(rh)

    def _floats(masses: Dict[int, Number]) -> Dict[int, float]:
        return {degree: float(mass) for degree, mass in masses.items()}

    return EnsembleSpec(
        name=name,
        lambda_=_floats(lam),
        rho=_floats(rh),
        L=_floats(node_l),
        R=_floats(node_r),
        d_v_max=max(lam),
        d_c_max=max(rh),
        exact_lambda={d: Fraction(v) for d, v in lam.items()} if exact else None,
        exact_rho={d: Fraction(v) for d, v in rh.items()} if exact else None,
        exact_L={d: Fraction(v) for d, v in node_l.items()} if exact else None,
    )


def parse_ensemble(config_text: str, *, exact: bool = False, name: Optional[str] = None) -> EnsembleSpec:
    """
    Parse a JSON ensemble config ``{"name": ..., "lambda": {...}, "rho": {...}}``.

    In exact mode decimal literals become ``Fraction`` values so the oracle can
    work in rational arithmetic.
    """
    parse_float = Fraction if exact else float
    try:
        raw = json.loads(config_text, parse_float=parse_float)
    except json.JSONDecodeError as exc:
        raise InputError(ErrorCode.MALFORMED_CONFIG, f"Ensemble config is not valid JSON: {exc}")

    if not isinstance(raw, dict):
        raise InputError(ErrorCode.MALFORMED_CONFIG, "Ensemble config must be a JSON object.")
    for key in ("lambda", "rho"):
        if key not in raw:
            raise InputError(ErrorCode.MALFORMED_CONFIG, f"Ensemble config is missing '{key}'.")

    return build_ensemble(raw["lambda"], raw["rho"], name=raw.get("name", name), exact=exact)


def load_ensemble(path: Union[str, Path], *, exact: bool = False) -> EnsembleSpec:
    """Load an ensemble config, resolving bare names against the shipped data directory."""
    file_path = Path(path)
    if not file_path.exists():
        candidate = _get_data_dir() / file_path.name
        if candidate.suffix == "":
            candidate = candidate.with_suffix(".json")
        if candidate.exists():
            file_path = candidate
        else:
            raise InputError(ErrorCode.MALFORMED_CONFIG, f"Ensemble file not found: {path}")

    key = (str(file_path.resolve()), exact)
    if key in _ENSEMBLE_CACHE:
        return _ENSEMBLE_CACHE[key]

    try:
        text = file_path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(ErrorCode.MALFORMED_CONFIG, f"Failed to read {file_path}: {exc}")

    spec = parse_ensemble(text, exact=exact, name=file_path.stem)
    logger.info(
        "[ensemble] Loaded %s: lambda=%s rho=%s", spec.name, spec.lambda_, spec.rho
    )
    _ENSEMBLE_CACHE[key] = spec
    return spec


def evaluate(spec: EnsembleSpec, which: Distribution, order: int, x: float) -> float:
    """Horner evaluation without the [0, 1] range check (generating-function markers leave it)."""
    return float(npoly.polyval(x, spec.coefficients(which, order)))


def poly_eval(spec: EnsembleSpec, which: Union[Distribution, str], order: int, x: float) -> float:
    """lambda(x), rho(x) or L(x), or their first/second derivative, for x in [0, 1]."""
    which = Distribution(which)
    if order not in (0, 1, 2):
        raise InputError(ErrorCode.INVALID_ARGUMENT, f"order must be 0, 1 or 2, got {order}.")
    if not (-RANGE_SLACK <= x <= 1.0 + RANGE_SLACK):
        raise InputError(ErrorCode.X_OUT_OF_RANGE, f"x = {x} is outside [0, 1].")
    return evaluate(spec, which, order, min(max(x, 0.0), 1.0))


def design_rate(spec: EnsembleSpec) -> float:
    """1 - (sum_j rho_j / j) / (sum_i lambda_i / i)."""
    return 1.0 - spec.edges_per_check_inverse / spec.edges_per_variable_inverse


def average_variable_degree(spec: EnsembleSpec) -> float:
    """L'(1), equal to 1 / sum_i (lambda_i / i)."""
    return poly_eval(spec, Distribution.L, 1, 1.0)


def stability_bound(spec: EnsembleSpec) -> float:
    """1 / (lambda'(0) rho'(1)); infinite without degree-2 variables."""
    lambda2 = spec.lambda_.get(2, 0.0)
    if lambda2 <= 0:
        return float("inf")
    return 1.0 / (lambda2 * poly_eval(spec, Distribution.RHO, 1, 1.0))


__all__ = [
    "build_ensemble",
    "parse_ensemble",
    "load_ensemble",
    "poly_eval",
    "evaluate",
    "design_rate",
    "average_variable_degree",
    "stability_bound",
]
