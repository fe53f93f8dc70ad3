"""Infrastructure discovery and pickup of PR device data."""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Set

from ..spectrum.channels import SlotUniforms
from ..spectrum.sensing import SpectrumModel
from ..topology.models import Deployment, Role
from ..tracking.event_log import EventKind, EventLog
from ..utils.errors import InvalidArgumentError
from ..utils.seeding import STREAM_PR_DATA
from .messages import Message

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RegistryEntry:
    """A non-CR device heard by a CR."""
    pr_node_id: int
    channel_id: int
    last_heard_slot: int


class InfrastructureRegistry:
    """Per-CR list of discovered PR devices."""

    def __init__(self):
        self._entries: Dict[int, Dict[int, RegistryEntry]] = {}

    def update(self, cr_id: int, pr_id: int, channel_id: int, slot: int) -> RegistryEntry:
        """Add or refresh an entry."""
        entry = RegistryEntry(pr_id, channel_id, slot)
        self._entries.setdefault(cr_id, {})[pr_id] = entry
        return entry

    def entries(self, cr_id: int) -> List[RegistryEntry]:
        """Entries of one CR, by PR id."""
        known = self._entries.get(cr_id, {})
        return [known[pr] for pr in sorted(known)]

    def is_empty(self, cr_id: int) -> bool:
        return not self._entries.get(cr_id)

    def known_by(self, cr_id: int) -> Set[int]:
        return set(self._entries.get(cr_id, {}))

    def __len__(self) -> int:
        return sum(len(v) for v in self._entries.values())


def scan_channel(slot: int, channels: int, beacon_period: int) -> int:
    """Channel a scanning CR dwells on: one beacon period per channel, cyclically."""
    return (slot // beacon_period) % channels


def beacons(pr_id: int, slot: int, beacon_period: int) -> bool:
    """Whether PR pr_id sends its beacon in slot."""
    return (slot + pr_id) % beacon_period == 0


def discover_infrastructure(registry: InfrastructureRegistry, deployment: Deployment, cr_id: int,
                            slot: int, channels: int, beacon_period: int,
                            log: Optional[EventLog] = None) -> List[RegistryEntry]:
    """
    Let a CR scan one channel for one slot.

    Every in-range PR bound to the scanned channel that beacons in this slot
    is added to (or refreshed in) the registry.

    Args:
        registry: Registry to update
        deployment: Current deployment
        cr_id: Scanning CR
        slot: Current slot
        channels: Channel count
        beacon_period: Slots between two beacons of a PR

    Returns:
        Entries added or refreshed this slot
    """
    if channels < 1 or beacon_period < 1:
        raise InvalidArgumentError("channels and beacon_period must be >= 1")
    channel = scan_channel(slot, channels, beacon_period)
    heard = []
    for other in sorted(deployment.graph.neighbors(cr_id)):
        pr = deployment.node(other)
        if pr.role != Role.PR_DEVICE or pr.channel != channel or not beacons(other, slot, beacon_period):
            continue
        heard.append(registry.update(cr_id, other, channel, slot))
        if log is not None:
            log.record(slot, EventKind.DISCOVER, cr_id, channel=channel, peer=other)
    return heard


class PrDataSource:
    """
    Pending-data flags of the PR devices.

    A PR without pending data generates a data unit in slot t iff its (seed, t)
    draw is below pr_data_rate. The unit stays pending until a CR picks it up.
    """

    def __init__(self, seed: int, pr_ids: Sequence[int], rate: float):
        if not 0.0 <= rate <= 1.0:
            raise InvalidArgumentError(f"pr_data_rate must be in [0, 1], got {rate}")
        self.rate = rate
        self.pending: Set[int] = set()
        self._draws = SlotUniforms(seed, STREAM_PR_DATA, pr_ids)

    def generate(self, slot: int) -> None:
        """Advance the generators by one slot."""
        if not self._draws.node_ids:
            return
        fresh = self._draws.column(slot) < self.rate
        for k, pr_id in enumerate(self._draws.node_ids):
            if fresh[k]:
                self.pending.add(pr_id)

    def has_data(self, pr_id: int) -> bool:
        return pr_id in self.pending

    def take(self, pr_id: int) -> None:
        self.pending.discard(pr_id)


def pickup_pr_data(deployment: Deployment, cr_id: int, registry: InfrastructureRegistry, slot: int,
                   spectrum: SpectrumModel, data: PrDataSource, ttl_init: int, msg_id: int,
                   log: Optional[EventLog] = None) -> Optional[Message]:
    """
    Try to receive a data unit from a discovered PR device.

    The CR tunes to the channel of the lowest-id registered PR that is still
    in range and has pending data. The pickup fails if another PR bound to
    the same channel within the CR's range is active in this slot.

    Args:
        deployment: Current deployment
        cr_id: Picking CR
        registry: Discovered infrastructure
        slot: Current slot
        spectrum: PR activity as seen from the deployment
        data: Pending-data flags
        ttl_init: Hop budget of the new message
        msg_id: Id for the new message

    Returns:
        The wrapped message, or None (empty registry, nothing pending, collision)
    """
    cr = deployment.node(cr_id)
    graph = deployment.graph
    for entry in registry.entries(cr_id):
        pr_id = entry.pr_node_id
        if not data.has_data(pr_id) or not graph.has_edge(cr_id, pr_id):
            continue
        interferers = [
            other for other in spectrum.active_sources(entry.channel_id, slot, cr.position, cr.range_m)
            if other != pr_id
        ]
        if interferers:
            if log is not None:
                log.record(slot, EventKind.PICKUP_FAIL, cr_id, channel=entry.channel_id, peer=pr_id)
            return None
        data.take(pr_id)
        if log is not None:
            log.record(slot, EventKind.PICKUP, cr_id, channel=entry.channel_id, msg=msg_id, ttl=ttl_init, peer=pr_id)
        return Message(msg_id=msg_id, injector_cr=cr_id, ttl=ttl_init, origin_pr=pr_id, created_slot=slot)
    return None


def has_pickup_work(deployment: Deployment, cr_id: int, registry: InfrastructureRegistry,
                    data: PrDataSource) -> bool:
    """Whether a pickup attempt would tie up the CR's radio this slot."""
    graph = deployment.graph
    return any(
        data.has_data(e.pr_node_id) and graph.has_edge(cr_id, e.pr_node_id)
        for e in registry.entries(cr_id)
    )
