from __future__ import annotations

from enum import Enum
from fractions import Fraction
from typing import Dict, Optional

import numpy as np
from numpy.polynomial import polynomial as npoly
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr


class Distribution(str, Enum):
    LAMBDA = "lambda"
    RHO = "rho"
    L = "L"


class EnsembleSpec(BaseModel):
    """
    A (lambda, rho) irregular LDPC ensemble.

    ``lambda_``/``rho`` are edge-perspective masses keyed by node degree,
    ``L``/``R`` the node-perspective masses derived from them. Only degrees
    with strictly positive mass are stored. When the config was parsed in
    exact mode the rational masses are kept alongside the floats.
    """

    model_config = ConfigDict(frozen=True, populate_by_name=True, arbitrary_types_allowed=True)

    name: Optional[str] = None
    lambda_: Dict[int, float] = Field(..., alias="lambda")
    rho: Dict[int, float]
    L: Dict[int, float]
    R: Dict[int, float]
    d_v_max: int = Field(..., ge=2)
    d_c_max: int = Field(..., ge=2)

    exact_lambda: Optional[Dict[int, Fraction]] = None
    exact_rho: Optional[Dict[int, Fraction]] = None
    exact_L: Optional[Dict[int, Fraction]] = None

    _coefficients: Dict[tuple[str, int], np.ndarray] = PrivateAttr(default_factory=dict)

    @property
    def is_exact(self) -> bool:
        return self.exact_lambda is not None and self.exact_rho is not None

    def masses(self, which: Distribution) -> Dict[int, float]:
        if which == Distribution.LAMBDA:
            return self.lambda_
        if which == Distribution.RHO:
            return self.rho
        return self.L

    def coefficients(self, which: Distribution, order: int = 0) -> np.ndarray:
        """
        Power-series coefficients (ascending) of lambda(x), rho(x) or L(x),
        differentiated ``order`` times. lambda and rho carry x^(d-1), L carries x^d.
        """
        key = (which.value, order)
        cached = self._coefficients.get(key)
        if cached is not None:
            return cached

        masses = self.masses(which)
        shift = 0 if which == Distribution.L else 1
        base = np.zeros(max(masses) - shift + 1)
        for degree, mass in masses.items():
            base[degree - shift] = mass
        coeffs = npoly.polyder(base, m=order) if order else base
        if coeffs.size == 0:
            coeffs = np.zeros(1)
        self._coefficients[key] = coeffs
        return coeffs

    @property
    def edges_per_variable_inverse(self) -> float:
        """sum_i lambda_i / i, the reciprocal of the average variable degree."""
        return sum(mass / degree for degree, mass in self.lambda_.items())

    @property
    def edges_per_check_inverse(self) -> float:
        return sum(mass / degree for degree, mass in self.rho.items())


class DegreeProfile(BaseModel):
    """Integer node counts realising an ensemble at blocklength ``n``."""

    model_config = ConfigDict(frozen=True)

    n: int = Field(..., ge=1)
    m: int = Field(..., ge=1)
    edges: int = Field(..., ge=1)
    variable_counts: Dict[int, int]
    check_counts: Dict[int, int]
    exact: bool = Field(
        True,
        description="True when counts equal n*L_i and E*rho_j/j exactly (no repair applied).",
    )

    def variable_degrees(self) -> list[int]:
        return [d for d in sorted(self.variable_counts) for _ in range(self.variable_counts[d])]

    def check_degrees(self) -> list[int]:
        return [d for d in sorted(self.check_counts) for _ in range(self.check_counts[d])]


__all__ = ["Distribution", "EnsembleSpec", "DegreeProfile"]
