from __future__ import annotations

from typing import Dict, List, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator


class DeTrajectory(BaseModel):
    """
    Density-evolution trajectory at a fixed channel erasure probability.

    ``P[tau]`` for tau = 0..T, ``Q[tau]`` for tau = 0..T+1 with ``Q[0] = epsilon``
    (messages into checks before the first iteration are channel values),
    ``Pb_inf[tau] = epsilon * L(P[tau])``.
    """

    model_config = ConfigDict(frozen=True)

    epsilon: float = Field(..., ge=0.0, le=1.0)
    T: int = Field(..., ge=0)
    P: List[float]
    Q: List[float]
    Pb_inf: List[float]

    @model_validator(mode="after")
    def _check_lengths(self) -> "DeTrajectory":
        if len(self.P) != self.T + 1 or len(self.Pb_inf) != self.T + 1 or len(self.Q) != self.T + 2:
            raise ValueError("trajectory arrays do not match T")
        return self


class GenArgs(BaseModel):
    """Generating-function markers; degrees left out default to 1."""

    model_config = ConfigDict(frozen=True)

    y: Dict[int, float] = Field(default_factory=dict)
    z: Dict[int, float] = Field(default_factory=dict)

    @classmethod
    def uniform(cls, x: float, variable_degrees, check_degrees) -> "GenArgs":
        return cls(y={i: x for i in variable_degrees}, z={j: x for j in check_degrees})


class RecursionTrace(BaseModel):
    """Per-iteration first and second derivative recursions for one marker family."""

    f1: List[float] = Field(default_factory=list)
    g1: List[float] = Field(default_factory=list)
    F1: List[float] = Field(default_factory=list)
    G1: List[float] = Field(default_factory=list)
    f2: List[float] = Field(default_factory=list)
    g2: List[float] = Field(default_factory=list)
    F2: List[float] = Field(default_factory=list)
    G2: List[float] = Field(default_factory=list)


class BetaState(BaseModel):
    """Everything computed on the way to beta(epsilon, t)."""

    epsilon: float
    t: int
    edge: RecursionTrace
    variable: Dict[int, RecursionTrace]
    check: Dict[int, RecursionTrace]

    E_KK: float
    E_VV: Dict[int, float]
    E_CC: Dict[int, float]
    sum_VV_term: float = Field(..., description="sum_i (i/lambda_i) E[V_i(V_i-1)P]")
    sum_CC_term: float = Field(..., description="sum_j (j/rho_j) E[C_j(C_j-1)P]")
    beta: float


class GammaState(BaseModel):
    """Memo tables and family sums behind gamma(epsilon, t)."""

    epsilon: float
    t: int
    f_table: Dict[Tuple[int, int], Tuple[float, float]] = Field(
        default_factory=dict,
        description="f(tau, s, p) = a + b*p stored as (a, b)",
    )
    g_table: Dict[Tuple[int, int], Tuple[float, float]] = Field(default_factory=dict)
    G1_table: Dict[Tuple[int, int], float] = Field(default_factory=dict)
    G2_table: Dict[Tuple[int, int], float] = Field(default_factory=dict)
    G3_table: Dict[Tuple[int, int], float] = Field(default_factory=dict)

    sum_Fv: float = 0.0
    sum_Fc: float = 0.0
    sum_Fr: float = 0.0
    gamma: float = 0.0


class CorrectionBreakdown(BaseModel):
    """alpha(epsilon, t) = beta + gamma, with the tree-side expectations."""

    model_config = ConfigDict(frozen=True)

    epsilon: float
    t: int
    beta: float
    gamma: float
    alpha: float
    pb_inf: float
    E_KK: float
    sum_VV_term: float
    sum_CC_term: float


__all__ = [
    "DeTrajectory",
    "GenArgs",
    "RecursionTrace",
    "BetaState",
    "GammaState",
    "CorrectionBreakdown",
]
