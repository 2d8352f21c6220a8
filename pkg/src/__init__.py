"""
Finite-length correction analysis of BP decoding for irregular LDPC ensembles on the BEC.

This package contains:
- Pydantic schemas for ensembles, trajectories, graphs and estimates
- Tool implementations for density evolution, the 1/n corrections, oracles and simulation
- Oracle-gate checks run through a LangGraph workflow
- The command-line harness
"""

__version__ = "0.1.0"
