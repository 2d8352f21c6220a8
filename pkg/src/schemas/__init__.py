"""
Schemas for ensembles, recursion states, graphs, simulation estimates and reports.
"""

from .ensemble_schema import DegreeProfile, Distribution, EnsembleSpec
from .evolution_schema import (
    BetaState,
    CorrectionBreakdown,
    DeTrajectory,
    GammaState,
    GenArgs,
    RecursionTrace,
)
from .graph_schema import NeighborhoodGraph, TannerGraphInstance
from .report_schema import CheckResult, GateReport, GateStamp, RunManifest
from .simulation_schema import AlphaEstimate, BlocklengthAverage, SimEstimate

__all__ = [
    "Distribution",
    "EnsembleSpec",
    "DegreeProfile",
    "DeTrajectory",
    "GenArgs",
    "RecursionTrace",
    "BetaState",
    "GammaState",
    "CorrectionBreakdown",
    "NeighborhoodGraph",
    "TannerGraphInstance",
    "SimEstimate",
    "BlocklengthAverage",
    "AlphaEstimate",
    "RunManifest",
    "CheckResult",
    "GateReport",
    "GateStamp",
]
