from __future__ import annotations

from enum import Enum
from typing import Optional


class ErrorCode(str, Enum):
    NEGATIVE_MASS = "NEGATIVE_MASS"
    SUM_NOT_ONE = "SUM_NOT_ONE"
    DEGREE_BELOW_TWO = "DEGREE_BELOW_TWO"
    EMPTY_DISTRIBUTION = "EMPTY_DISTRIBUTION"
    MALFORMED_CONFIG = "MALFORMED_CONFIG"
    X_OUT_OF_RANGE = "X_OUT_OF_RANGE"
    EPSILON_OUT_OF_RANGE = "EPSILON_OUT_OF_RANGE"
    TRAJECTORY_TOO_SHORT = "TRAJECTORY_TOO_SHORT"
    INDEX_DOMAIN_VIOLATION = "INDEX_DOMAIN_VIOLATION"
    ENUMERATION_TOO_LARGE = "ENUMERATION_TOO_LARGE"
    N_TOO_SMALL = "N_TOO_SMALL"
    NOT_A_TREE = "NOT_A_TREE"
    N_TOO_LARGE_FOR_EXACT = "N_TOO_LARGE_FOR_EXACT"
    UNREALIZABLE_BLOCKLENGTH = "UNREALIZABLE_BLOCKLENGTH"
    INVALID_ARGUMENT = "INVALID_ARGUMENT"
    GAMMA_NOT_TRUSTED = "GAMMA_NOT_TRUSTED"
    NON_FINITE_RESULT = "NON_FINITE_RESULT"


class AnalysisError(Exception):
    """Base error carrying a stable ``ErrorCode``."""

    def __init__(self, code: ErrorCode, message: str, *, detail: Optional[dict] = None):
        super().__init__(message)
        self.code = code
        self.detail = detail or {}

    def __str__(self) -> str:
        return f"[{self.code.value}] {self.args[0]}"


class InputError(AnalysisError, ValueError):
    """Caller-side problem: invalid config, out-of-range argument, unrealizable size."""


class InternalError(AnalysisError, RuntimeError):
    """A recursion or construction invariant was broken."""


__all__ = ["ErrorCode", "AnalysisError", "InputError", "InternalError"]
