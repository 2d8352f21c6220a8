from __future__ import annotations

from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


class NeighborhoodGraph(BaseModel):
    """
    Depth-t computation graph rooted at a variable node.

    For trees ``structure`` is the canonical nested form
    ``(root_degree, (check, ...))`` where a check is ``(degree, (variable, ...))``
    and a variable is ``(degree, (check, ...))``; leaves carry an empty tuple.
    Children are sorted, so equal unordered trees have equal structures.
    Graphs with cycles carry only the counts (``structure`` is None).
    """

    model_config = ConfigDict(frozen=True)

    depth: int = Field(..., ge=0)
    root_degree: int = Field(..., ge=1)
    structure: Optional[Any] = None
    v_counts: Dict[int, int] = Field(
        default_factory=dict, description="Non-root variable nodes per degree."
    )
    c_counts: Dict[int, int] = Field(default_factory=dict)
    k: int = Field(..., ge=0, description="Edges revealed in the graph.")
    cycles: int = Field(0, ge=0)
    multiplicity: int = Field(1, ge=1)

    @model_validator(mode="after")
    def _check_identities(self) -> "NeighborhoodGraph":
        nodes = 1 + sum(self.v_counts.values()) + sum(self.c_counts.values())
        if nodes != self.k + 1 - self.cycles:
            raise ValueError(f"node/edge identity violated: {nodes} nodes, {self.k} edges")
        if sum(j * c for j, c in self.c_counts.items()) != self.k:
            raise ValueError("check sockets do not account for every edge")
        if sum(i * v for i, v in self.v_counts.items()) + self.root_degree < self.k:
            raise ValueError("variable sockets cannot cover the revealed edges")
        return self

    @property
    def is_tree(self) -> bool:
        return self.cycles == 0 and self.structure is not None

    def variable_totals(self) -> Dict[int, int]:
        """Variable node counts per degree including the root."""
        totals = dict(self.v_counts)
        totals[self.root_degree] = totals.get(self.root_degree, 0) + 1
        return totals


class TannerGraphInstance(BaseModel):
    """
    A sampled configuration-model graph. Edge ``e`` joins variable
    ``var_of_edge[e]`` and check ``chk_of_edge[e]``; variable sockets are laid
    out in node order and ``socket_permutation[e]`` is the check socket paired
    with variable socket ``e``. Multi-edges are allowed.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n: int = Field(..., ge=1)
    m: int = Field(..., ge=1)
    variable_degrees: List[int]
    check_degrees: List[int]
    socket_permutation: np.ndarray
    var_of_edge: np.ndarray
    chk_of_edge: np.ndarray

    @model_validator(mode="after")
    def _check_sockets(self) -> "TannerGraphInstance":
        if sum(self.variable_degrees) != sum(self.check_degrees):
            raise ValueError("socket counts differ between variable and check sides")
        if len(self.variable_degrees) != self.n or len(self.check_degrees) != self.m:
            raise ValueError("degree lists do not match node counts")
        if self.var_of_edge.shape != self.chk_of_edge.shape:
            raise ValueError("edge arrays have different shapes")
        return self

    @property
    def edges(self) -> int:
        return int(self.var_of_edge.size)


__all__ = ["NeighborhoodGraph", "TannerGraphInstance"]
