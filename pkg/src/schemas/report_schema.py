from __future__ import annotations

from datetime import datetime
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field


class RunManifest(BaseModel):
    """Self-description written as comment lines above every CSV table."""

    subcommand: str
    ensemble_path: Optional[str] = None
    parameters: Dict[str, Any] = Field(default_factory=dict)
    seed: Optional[int] = None
    output_path: Optional[str] = None
    tool_version: str
    timestamp: str

    def header_lines(self) -> List[str]:
        lines = [
            f"# subcommand: {self.subcommand}",
            f"# ensemble: {self.ensemble_path or '-'}",
        ]
        for key in sorted(self.parameters):
            lines.append(f"# {key}: {self.parameters[key]}")
        lines.append(f"# seed: {self.seed if self.seed is not None else '-'}")
        lines.append(f"# output: {self.output_path or 'stdout'}")
        lines.append(f"# tool_version: {self.tool_version}")
        lines.append(f"# timestamp: {self.timestamp}")
        return lines


class CheckResult(BaseModel):
    """Outcome of one oracle-gate check."""

    name: str
    passed: bool
    cases: int = Field(0, ge=0)
    max_deviation: float = 0.0
    tolerance: Optional[float] = None
    failures: List[str] = Field(default_factory=list)
    details: Dict[str, Any] = Field(default_factory=dict)


class GateReport(BaseModel):
    """Final structured output of ``oracle-check``."""

    ensemble: str
    t_max: int
    passed: bool
    checks: List[CheckResult] = Field(default_factory=list)
    tool_version: str
    generated_at: datetime = Field(default_factory=datetime.utcnow)

    class Config:
        extra = "forbid"


class GateStamp(BaseModel):
    """Marker left by a passing gate; gamma output is trusted only with one."""

    passed: bool
    tool_version: str
    ensemble: str
    timestamp: str


__all__ = ["RunManifest", "CheckResult", "GateReport", "GateStamp"]
