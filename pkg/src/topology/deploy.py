"""Random deployments, the neighbor relation, mobility and the text format."""

import logging
from typing import Dict, List, Optional

import numpy as np

from ..utils.config import ExperimentConfig
from ..utils.errors import DeploymentError, LogParseError
from ..utils.seeding import STREAM_DEPLOY, STREAM_MOBILITY, stream
from .models import Deployment, Node, Role

logger = logging.getLogger(__name__)


def deploy_random(config: ExperimentConfig, seed: Optional[int] = None) -> Deployment:
    """
    Place every node of a run.

    Portal 0 sits at the area center (extra portals are uniform). CMRs are drawn
    uniformly and re-drawn until each one is within range of a portal or of an
    already placed CMR, so every CMR has a backbone path to a portal. CR and PR
    devices are uniform over the area; each PR is bound to a uniform channel.

    Args:
        config: Experiment configuration
        seed: Run seed (defaults to config.seed)

    Returns:
        The deployment. Node ids: portals, then CMRs, then CRs, then PRs.

    Raises:
        DeploymentError: A CMR could not be placed within max_placement_attempts
    """
    seed = config.seed if seed is None else seed
    rng = stream(seed, STREAM_DEPLOY)
    width, height = config.area_width, config.area_height

    def uniform() -> np.ndarray:
        return rng.uniform((0.0, 0.0), (width, height))

    nodes: List[Node] = []
    next_id = 0

    portal_xy: List[np.ndarray] = []
    for index in range(config.portal_count):
        xy = np.array([width / 2, height / 2]) if index == 0 else uniform()
        portal_xy.append(xy)
        nodes.append(Node(node_id=next_id, role=Role.PORTAL, x=float(xy[0]), y=float(xy[1]),
                          range_m=config.portal_range, radio_count=max(2, config.cmr_radios)))
        next_id += 1

    portal_reach = min(config.cmr_range, config.portal_range)
    cmr_xy: List[np.ndarray] = []
    for index in range(config.cmr_count):
        for _ in range(config.max_placement_attempts):
            xy = uniform()
            if _within(xy, portal_xy, portal_reach) or _within(xy, cmr_xy, config.cmr_range):
                break
        else:
            raise DeploymentError(
                f"could not place CMR {index} next to the backbone in "
                f"{config.max_placement_attempts} attempts"
            )
        cmr_xy.append(xy)
        nodes.append(Node(node_id=next_id, role=Role.CMR, x=float(xy[0]), y=float(xy[1]),
                          range_m=config.cmr_range, radio_count=config.cmr_radios))
        next_id += 1

    for _ in range(config.cr_count):
        xy = uniform()
        nodes.append(Node(node_id=next_id, role=Role.CR_DEVICE, x=float(xy[0]), y=float(xy[1]),
                          range_m=config.cr_range, radio_count=config.cr_radios,
                          mobile=config.cr_mobile))
        next_id += 1

    for _ in range(config.pr_count):
        xy = uniform()
        channel = int(rng.integers(config.channels))
        nodes.append(Node(node_id=next_id, role=Role.PR_DEVICE, x=float(xy[0]), y=float(xy[1]),
                          range_m=config.pr_range, channel=channel))
        next_id += 1

    deployment = Deployment(width=width, height=height, nodes=nodes, seed=seed)
    logger.debug(
        f"Deployed {config.portal_count} portal(s), {config.cmr_count} CMRs, "
        f"{config.cr_count} CRs, {config.pr_count} PRs (seed {seed})"
    )
    return deployment


def _within(xy: np.ndarray, anchors: List[np.ndarray], reach: float) -> bool:
    return any(float(np.hypot(*(xy - a))) <= reach for a in anchors)


def neighbors(deployment: Deployment, node_id: int) -> List[int]:
    """
    One-hop neighbors of a node.

    Args:
        deployment: The deployment
        node_id: Node to query

    Returns:
        Ascending ids of all nodes within min(own range, their range)

    Raises:
        NotFoundError: Unknown node id
    """
    deployment.node(node_id)
    return sorted(deployment.graph.neighbors(node_id))


def cmr_neighborhood(deployment: Deployment) -> set:
    """Ids of CMRs and every node that is a one-hop neighbor of a CMR."""
    graph = deployment.graph
    covered = set()
    for cmr in deployment.ids(Role.CMR):
        covered.add(cmr)
        covered.update(graph.neighbors(cmr))
    return covered


def backbone_satisfied(deployment: Deployment) -> bool:
    """True iff every CMR reaches a portal over the backbone."""
    return all(deployment.backbone_path(c) is not None for c in deployment.ids(Role.CMR))


class RandomWaypoint:
    """Random-waypoint mobility for the mobile nodes of a deployment."""

    def __init__(self, deployment: Deployment, speed: float, seed: int):
        """
        Args:
            deployment: Initial deployment
            speed: Meters moved per slot
            seed: Run seed
        """
        self.speed = speed
        self.width = deployment.width
        self.height = deployment.height
        self._rng = stream(seed, STREAM_MOBILITY)
        self._mobile = [n.node_id for n in deployment.nodes if n.mobile]
        self._waypoints: Dict[int, np.ndarray] = {i: self._draw() for i in self._mobile}

    def _draw(self) -> np.ndarray:
        return self._rng.uniform((0.0, 0.0), (self.width, self.height))

    def advance(self, deployment: Deployment, slots: int) -> Deployment:
        """Move every mobile node for the given number of slots."""
        if not self._mobile or slots <= 0 or self.speed <= 0:
            return deployment
        moved: Dict[int, np.ndarray] = {}
        for node_id in self._mobile:
            position = deployment.node(node_id).position
            budget = self.speed * slots
            while budget > 0:
                target = self._waypoints[node_id]
                gap = float(np.hypot(*(target - position)))
                if gap <= budget:
                    position = target
                    budget -= gap
                    self._waypoints[node_id] = self._draw()
                else:
                    position = position + (target - position) * (budget / gap)
                    budget = 0.0
            moved[node_id] = position
        return deployment.moved(moved)


def dump_deployment(deployment: Deployment) -> str:
    """
    Serialize a deployment, one node per line.

    Format: ``id role x y range radios channel`` with ``-`` for no channel,
    after a ``# area W H seed S`` header.
    """
    lines = [f"# area {deployment.width!r} {deployment.height!r} seed {deployment.seed}"]
    for n in sorted(deployment.nodes, key=lambda node: node.node_id):
        channel = "-" if n.channel is None else str(n.channel)
        mobile = " mobile" if n.mobile else ""
        lines.append(f"{n.node_id} {n.role.value} {n.x!r} {n.y!r} {n.range_m!r} {n.radio_count} {channel}{mobile}")
    return "\n".join(lines) + "\n"


def load_deployment(text: str, path: Optional[str] = None) -> Deployment:
    """
    Parse the format written by dump_deployment.

    Raises:
        LogParseError: Malformed line, with its line number
    """
    width = height = None
    seed = 0
    nodes: List[Node] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "#":
                if len(parts) >= 6 and parts[1] == "area" and parts[4] == "seed":
                    width, height, seed = float(parts[2]), float(parts[3]), int(parts[5])
                continue
            if len(parts) not in (7, 8) or (len(parts) == 8 and parts[7] != "mobile"):
                raise ValueError(f"expected 7 fields, got {len(parts)}")
            nodes.append(Node(
                node_id=int(parts[0]),
                role=Role(parts[1]),
                x=float(parts[2]),
                y=float(parts[3]),
                range_m=float(parts[4]),
                radio_count=int(parts[5]),
                channel=None if parts[6] == "-" else int(parts[6]),
                mobile=len(parts) == 8,
            ))
        except ValueError as exc:
            raise LogParseError(number, str(exc), path) from exc
    if width is None:
        raise LogParseError(1, "missing '# area W H seed S' header", path)
    return Deployment(width=width, height=height, nodes=nodes, seed=seed)
