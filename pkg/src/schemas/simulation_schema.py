from __future__ import annotations

import math
from typing import List

from pydantic import BaseModel, ConfigDict, Field, field_validator


class SimEstimate(BaseModel):
    """Monte Carlo estimate of P_b(n, epsilon, t) over the ensemble."""

    model_config = ConfigDict(frozen=True)

    n: int = Field(..., ge=1)
    epsilon: float = Field(..., ge=0.0, le=1.0)
    t: int = Field(..., ge=0)
    trials: int = Field(..., ge=1)
    pb_hat: float = Field(..., ge=0.0, le=1.0, description="Mean per-block erased fraction.")
    stderr: float = Field(..., ge=0.0)
    pb_inf: float
    scaled_gap: float = Field(..., description="n * (pb_hat - pb_inf)")
    scaled_stderr: float = Field(..., ge=0.0)
    seed: int

    @field_validator("scaled_gap")
    @classmethod
    def _finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("scaled_gap must be finite")
        return value


class BlocklengthAverage(BaseModel):
    """Exact-per-graph average of P_b at one blocklength."""

    n: int
    graphs: int
    pb_hat: float
    stderr: float
    scaled_gap: float


class AlphaEstimate(BaseModel):
    """alpha(epsilon, t) extrapolated from exact finite-n ensemble averages."""

    epsilon: float
    t: int
    pb_inf: float
    per_n: List[BlocklengthAverage]
    fit_n: List[int] = Field(default_factory=list, description="Blocklengths the 1/n fit passes through.")
    alpha_hat: float
    bias: float = Field(
        0.0, ge=0.0, description="Highest fitted 1/n term at the largest n; included in the interval."
    )
    ci_low: float
    ci_high: float
    confidence: float = 0.95
    seed: int

    def brackets(self, value: float, slack: float = 1e-12) -> bool:
        return self.ci_low - slack <= value <= self.ci_high + slack


__all__ = ["SimEstimate", "BlocklengthAverage", "AlphaEstimate"]
