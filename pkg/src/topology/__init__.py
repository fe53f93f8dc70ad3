"""Node placement, roles and the neighbor relation."""

from .deploy import (
    RandomWaypoint,
    backbone_satisfied,
    cmr_neighborhood,
    deploy_random,
    dump_deployment,
    load_deployment,
    neighbors,
)
from .models import Deployment, Node, Role, unit_disk_graph

__all__ = [
    "Deployment",
    "Node",
    "RandomWaypoint",
    "Role",
    "backbone_satisfied",
    "cmr_neighborhood",
    "deploy_random",
    "dump_deployment",
    "load_deployment",
    "neighbors",
    "unit_disk_graph",
]
