"""Small hand-built deployments shared by the test suites."""

from typing import List, Optional, Sequence, Tuple

from src.topology.models import Deployment, Node, Role

ROLES = {"pr": Role.PR_DEVICE, "cr": Role.CR_DEVICE, "cmr": Role.CMR, "portal": Role.PORTAL}


def node(node_id: int, role: str, x: float, y: float = 0.0, range_m: float = 100.0,
         channel: Optional[int] = None, radios: Optional[int] = None) -> Node:
    """Node shorthand; CMRs and portals default to 2 radios."""
    kind = ROLES[role]
    if radios is None:
        radios = 2 if kind in (Role.CMR, Role.PORTAL) else 1
    return Node(node_id=node_id, role=kind, x=x, y=y, range_m=range_m, radio_count=radios, channel=channel)


def deployment(nodes: Sequence[Node], seed: int = 0, size: float = 1000.0) -> Deployment:
    return Deployment(width=size, height=size, nodes=list(nodes), seed=seed)


def line(roles: Sequence[str], spacing: float = 80.0, range_m: float = 100.0, seed: int = 0,
         extra: Sequence[Node] = ()) -> Deployment:
    """Nodes on the x axis, `spacing` apart, so each node only reaches its direct neighbors."""
    nodes: List[Node] = [node(i, role, x=10.0 + i * spacing, range_m=range_m) for i, role in enumerate(roles)]
    nodes.extend(extra)
    return deployment(nodes, seed=seed)


def pr_at(node_id: int, x: float, channel: int, y: float = 0.0, range_m: float = 100.0) -> Node:
    return node(node_id, "pr", x=x, y=y, range_m=range_m, channel=channel)


def edges(dep: Deployment) -> List[Tuple[int, int]]:
    return sorted(tuple(sorted(e)) for e in dep.graph.edges())
