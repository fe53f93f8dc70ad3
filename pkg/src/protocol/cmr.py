"""CMR behaviors: backbone relaying to the portal and single-hop polling."""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

from ..topology.models import Deployment, Role
from ..tracking.event_log import EventKind, EventLog
from ..utils.errors import InvalidArgumentError, NoBackbonePathError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RelayAction:
    """Forwarding of one message from a CMR over the backbone."""
    cmr_id: int
    msg_id: int
    depart_slot: int
    path: Optional[List[int]]  # CMR ... portal, None when no path exists

    @property
    def stuck(self) -> bool:
        return self.path is None

    @property
    def arrival_slot(self) -> Optional[int]:
        """Slot the portal receives the message (one backbone hop per slot)."""
        if self.path is None:
            return None
        return self.depart_slot + len(self.path) - 1

    @property
    def portal(self) -> Optional[int]:
        return None if self.path is None else self.path[-1]


def backbone_route(deployment: Deployment, cmr_id: int) -> List[int]:
    """
    Fewest-hop backbone path from a CMR to its nearest portal.

    Raises:
        InvalidArgumentError: cmr_id is not a CMR
        NoBackbonePathError: The CMR is cut off from every portal
    """
    if deployment.node(cmr_id).role != Role.CMR:
        raise InvalidArgumentError(f"node {cmr_id} is not a CMR")
    path = deployment.backbone_path(cmr_id)
    if path is None:
        raise NoBackbonePathError(f"CMR {cmr_id} has no backbone path to a portal")
    return path


def cmr_relay(deployment: Deployment, cmr_id: int, msg_id: int, slot: int) -> RelayAction:
    """
    Forward a message received by a CMR toward the portal.

    The first backbone hop happens in the slot after reception, so a CMR
    adjacent to the portal delivers at slot + 1.

    Args:
        deployment: Current deployment
        cmr_id: Receiving CMR
        msg_id: Message to forward
        slot: Reception slot

    Returns:
        The relay action; a stuck action when no backbone path exists
    """
    try:
        path = backbone_route(deployment, cmr_id)
    except NoBackbonePathError as e:
        logger.warning(f"slot {slot}: {e}; message {msg_id} stays at the CMR")
        path = None
    return RelayAction(cmr_id=cmr_id, msg_id=msg_id, depart_slot=slot, path=path)


class Backbone:
    """Messages in transit over the CMR backbone."""

    def __init__(self, log: Optional[EventLog] = None):
        self.log = log
        self._transit: List[RelayAction] = []

    def start(self, action: RelayAction) -> None:
        if action.stuck:
            return
        if any(a.msg_id == action.msg_id for a in self._transit):
            return  # a copy is already on its way
        self._transit.append(action)

    def in_transit(self, msg_id: int) -> bool:
        return any(a.msg_id == msg_id for a in self._transit)

    def advance(self, slot: int) -> List[RelayAction]:
        """Move every relay one hop; return the relays that reached a portal at slot."""
        arrived = []
        for action in list(self._transit):
            hop = slot - action.depart_slot
            if hop < 1:
                continue
            if self.log is not None:
                self.log.record(slot, EventKind.RELAY, action.path[hop - 1], msg=action.msg_id,
                                peer=action.path[hop])
            if slot == action.arrival_slot:
                if self.log is not None:
                    self.log.record(slot, EventKind.PORTAL, action.portal, msg=action.msg_id, peer=action.path[-2])
                self._transit.remove(action)
                arrived.append(action)
        return arrived


def associate_crs(deployment: Deployment) -> Dict[int, List[int]]:
    """
    Attach each CR to its nearest CMR neighbor (ties: lowest id).

    Returns:
        cmr_id -> ascending ids of its CRs; CRs with no CMR neighbor are absent
    """
    graph = deployment.graph
    members: Dict[int, List[int]] = {cmr: [] for cmr in deployment.ids(Role.CMR)}
    for cr in deployment.by_role(Role.CR_DEVICE):
        near = [deployment.node(v) for v in graph.neighbors(cr.node_id) if v in members]
        if not near:
            continue
        best = min(near, key=lambda c: (cr.distance_to(c), c.node_id))
        members[best.node_id].append(cr.node_id)
    return {cmr: sorted(crs) for cmr, crs in members.items()}


@dataclass(frozen=True)
class Grant:
    """Permission for one CR to transmit to its CMR on a channel in a slot."""
    cr_id: int
    channel: int
    slot: int


class CmrPoller:
    """
    Round-robin poll schedule of one CMR.

    CMR k of n polls only in slots with slot mod n == k. In its slots it serves
    up to access_radios assigned channels, rotating over them, and grants the
    next CR in round-robin order on each served channel.
    """

    def __init__(self, cmr_id: int, rank: int, period: int, access_radios: int):
        if period < 1 or not 0 <= rank < period:
            raise InvalidArgumentError(f"poll rank {rank} outside period {period}")
        if access_radios < 1:
            raise InvalidArgumentError("a polling CMR needs an access radio")
        self.cmr_id = cmr_id
        self.rank = rank
        self.period = period
        self.access_radios = access_radios
        self.assignment: Dict[int, int] = {}
        self._members: Dict[int, List[int]] = {}
        self._cursor: Dict[int, int] = {}
        self._rotation = 0

    def assign(self, assignment: Dict[int, int]) -> None:
        """Install a new CR -> channel assignment; poll order follows dealing order."""
        self.assignment = dict(assignment)
        members: Dict[int, List[int]] = {}
        for cr, channel in assignment.items():
            members.setdefault(channel, []).append(cr)
        self._members = {c: members[c] for c in sorted(members)}
        self._cursor = {c: self._cursor.get(c, 0) % len(crs) for c, crs in self._members.items()}

    @property
    def channels(self) -> List[int]:
        return list(self._members)

    def poll(self, slot: int) -> List[Grant]:
        if slot % self.period != self.rank or not self._members:
            return []
        channels = self.channels
        served = min(self.access_radios, len(channels))
        start = self._rotation % len(channels)
        self._rotation += served
        grants = []
        for k in range(served):
            channel = channels[(start + k) % len(channels)]
            crs = self._members[channel]
            grants.append(Grant(crs[self._cursor[channel] % len(crs)], channel, slot))
            self._cursor[channel] = (self._cursor[channel] + 1) % len(crs)
        return grants


def cmr_poll(poller: CmrPoller, slot: int, log: Optional[EventLog] = None) -> List[Grant]:
    """
    Grants a CMR issues in a slot.

    At most one grant per channel per slot; CRs on a channel are granted in
    round-robin order.
    """
    grants = poller.poll(slot)
    if log is not None:
        for g in grants:
            log.record(slot, EventKind.GRANT, poller.cmr_id, channel=g.channel, peer=g.cr_id)
    return grants


def build_pollers(deployment: Deployment, cmr_ids: Sequence[int]) -> Dict[int, CmrPoller]:
    """One poller per CMR, ranked by id for backbone time division."""
    ordered = sorted(cmr_ids)
    return {
        cmr: CmrPoller(cmr, k, len(ordered), deployment.node(cmr).radio_count - 1)
        for k, cmr in enumerate(ordered)
    }
