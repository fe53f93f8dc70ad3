"""Pydantic models for nodes and deployments."""

from enum import Enum
from typing import Dict, List, Optional

import networkx as nx
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, model_validator

from ..utils.errors import NotFoundError


class Role(str, Enum):
    """Node roles of the three-tier architecture plus the legacy devices."""
    PR_DEVICE = "pr"
    CR_DEVICE = "cr"
    CMR = "cmr"
    PORTAL = "portal"


class Node(BaseModel):
    """A deployed node."""
    model_config = ConfigDict(frozen=True)

    node_id: int = Field(ge=0)
    role: Role
    x: float
    y: float
    range_m: float = Field(gt=0)  # transmission and sensing radius
    radio_count: int = Field(default=1, ge=1)
    channel: Optional[int] = None  # bound channel, PR devices only
    mobile: bool = False

    @model_validator(mode="after")
    def _check_role(self) -> "Node":
        if self.role == Role.CMR and self.radio_count < 2:
            raise ValueError("a CMR needs at least 2 radios")
        if self.role == Role.PR_DEVICE and self.channel is None:
            raise ValueError("a PR device must be bound to a channel")
        if self.role != Role.PR_DEVICE and self.channel is not None:
            raise ValueError("only PR devices are bound to a channel")
        return self

    @property
    def position(self) -> np.ndarray:
        """Position as a 2-vector."""
        return np.array([self.x, self.y])

    def distance_to(self, other: "Node") -> float:
        """Euclidean distance in meters."""
        return float(np.hypot(self.x - other.x, self.y - other.y))


class Deployment(BaseModel):
    """Placement of every node of one run. Immutable once built."""
    model_config = ConfigDict(frozen=True)

    width: float = Field(gt=0)
    height: float = Field(gt=0)
    nodes: List[Node] = Field(default_factory=list)
    seed: int = 0

    _by_id: Dict[int, Node] = PrivateAttr(default_factory=dict)
    _graph: Optional[nx.Graph] = PrivateAttr(default=None)
    _backbone_paths: Optional[Dict[int, List[int]]] = PrivateAttr(default=None)

    @model_validator(mode="after")
    def _check_ids(self) -> "Deployment":
        ids = [n.node_id for n in self.nodes]
        if len(set(ids)) != len(ids):
            raise ValueError("node ids must be unique")
        return self

    def model_post_init(self, __context) -> None:
        self._by_id = {n.node_id: n for n in self.nodes}

    def node(self, node_id: int) -> Node:
        """Look up a node, raising NotFoundError for unknown ids."""
        try:
            return self._by_id[node_id]
        except KeyError:
            raise NotFoundError(f"unknown node id {node_id}") from None

    def ids(self, role: Role) -> List[int]:
        """Node ids with the given role, ascending."""
        return sorted(n.node_id for n in self.nodes if n.role == role)

    def by_role(self, role: Role) -> List[Node]:
        return [self._by_id[i] for i in self.ids(role)]

    def positions(self, ids: List[int]) -> np.ndarray:
        """Positions of the given nodes as an (n, 2) array."""
        if not ids:
            return np.zeros((0, 2))
        return np.array([[self._by_id[i].x, self._by_id[i].y] for i in ids])

    def ranges(self, ids: List[int]) -> np.ndarray:
        return np.array([self._by_id[i].range_m for i in ids], dtype=float)

    @property
    def graph(self) -> nx.Graph:
        """Unit-disk graph over all nodes: an edge iff distance ≤ min of both ranges."""
        if self._graph is None:
            self._graph = unit_disk_graph(self.nodes)
        return self._graph

    @property
    def backbone(self) -> nx.Graph:
        """CMR/portal subgraph of the unit-disk graph."""
        members = [n.node_id for n in self.nodes if n.role in (Role.CMR, Role.PORTAL)]
        return self.graph.subgraph(members)

    def backbone_path(self, cmr_id: int) -> Optional[List[int]]:
        """Fewest-hop backbone path from a CMR to its nearest portal (None if cut off)."""
        if self._backbone_paths is None:
            portals = self.ids(Role.PORTAL)
            paths = nx.multi_source_dijkstra_path(self.backbone, portals) if portals else {}
            # paths start at the portal
            self._backbone_paths = {node: list(reversed(path)) for node, path in paths.items()}
        self.node(cmr_id)
        return self._backbone_paths.get(cmr_id)

    def moved(self, positions: Dict[int, np.ndarray]) -> "Deployment":
        """Copy of this deployment with some nodes at new positions."""
        nodes = [
            n.model_copy(update={"x": float(positions[n.node_id][0]), "y": float(positions[n.node_id][1])})
            if n.node_id in positions else n
            for n in self.nodes
        ]
        return Deployment(width=self.width, height=self.height, nodes=nodes, seed=self.seed)


def unit_disk_graph(nodes: List[Node]) -> nx.Graph:
    """
    Build the neighbor graph of a node list.

    Args:
        nodes: Nodes with positions and ranges

    Returns:
        Graph with one vertex per node id and symmetric, irreflexive edges
    """
    graph = nx.Graph()
    ordered = sorted(nodes, key=lambda n: n.node_id)
    graph.add_nodes_from((n.node_id, {"role": n.role}) for n in ordered)
    if len(ordered) < 2:
        return graph

    ids = np.array([n.node_id for n in ordered])
    xy = np.array([[n.x, n.y] for n in ordered])
    reach = np.array([n.range_m for n in ordered])

    dist = np.hypot(xy[:, None, 0] - xy[None, :, 0], xy[:, None, 1] - xy[None, :, 1])
    limit = np.minimum(reach[:, None], reach[None, :])
    rows, cols = np.nonzero(np.triu(dist <= limit, k=1))
    graph.add_edges_from(zip(ids[rows].tolist(), ids[cols].tolist()))
    return graph
