from .check_registry import CheckRegistry
from .errors import AnalysisError, ErrorCode, InputError, InternalError

__all__ = ["CheckRegistry", "AnalysisError", "ErrorCode", "InputError", "InternalError"]
