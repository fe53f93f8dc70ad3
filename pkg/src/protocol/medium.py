"""Shared wireless medium: which transmissions of a slot are received where."""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Set, Tuple

from ..spectrum.sensing import SpectrumModel
from ..topology.models import Deployment

from .messages import Transmission

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Reception:
    receiver: int
    transmission: Transmission


@dataclass
class SlotOutcome:
    """Resolved receptions of one slot."""
    slot: int
    transmissions: List[Transmission] = field(default_factory=list)
    receptions: List[Reception] = field(default_factory=list)
    collisions: List[Tuple[int, int]] = field(default_factory=list)  # (receiver, channel)
    blocked: List[Reception] = field(default_factory=list)  # lost to PR activity
    cmr_deliveries: List[Tuple[int, int]] = field(default_factory=list)  # (cmr, msg_id)

    def received_by(self, sender: int) -> Set[int]:
        return {r.receiver for r in self.receptions if r.transmission.sender == sender}


def resolve_receptions(deployment: Deployment, spectrum: SpectrumModel, slot: int,
                       transmissions: Iterable[Transmission], listening: Dict[int, Set[int]],
                       carried: Callable[[int, int], bool]) -> SlotOutcome:
    """
    Decide every reception of a slot from the state at the start of the slot.

    A neighbor v of a sender receives the transmission iff v is not itself
    transmitting, listens on the channel, is reached by no other same-channel
    transmission of this slot, sees no active PR on the channel, and has not
    carried the message before.

    Args:
        deployment: Current deployment
        spectrum: PR activity model
        slot: Current slot
        transmissions: All transmissions of the slot
        listening: Channels each potential receiver listens on
        carried: carried(node, msg_id) -> whether node already had the message

    Returns:
        The slot outcome (receptions are not yet applied to any state)
    """
    transmissions = list(transmissions)
    outcome = SlotOutcome(slot=slot, transmissions=transmissions)
    graph = deployment.graph
    senders = {tx.sender for tx in transmissions}
    on_channel: Dict[int, List[int]] = {}
    for tx in transmissions:
        on_channel.setdefault(tx.channel, []).append(tx.sender)

    collided: Set[Tuple[int, int]] = set()
    for tx in transmissions:
        for v in sorted(graph.neighbors(tx.sender)):
            if v in senders or tx.channel not in listening.get(v, ()):
                continue
            heard = sum(1 for s in on_channel[tx.channel] if s == tx.sender or graph.has_edge(s, v))
            if heard >= 2:
                if (v, tx.channel) not in collided:
                    collided.add((v, tx.channel))
                    outcome.collisions.append((v, tx.channel))
                continue
            if tx.msg_id is not None and carried(v, tx.msg_id):
                continue
            node = deployment.node(v)
            if spectrum.channel_busy(tx.channel, slot, node.position, node.range_m):
                outcome.blocked.append(Reception(v, tx))
                continue
            outcome.receptions.append(Reception(v, tx))
    return outcome
