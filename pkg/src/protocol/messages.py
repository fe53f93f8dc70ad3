"""Messages and transmissions carried by the CR network."""

from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Set

from ..utils.errors import InvalidArgumentError


class TerminalState(str, Enum):
    """Where an injected message ended up."""
    REACHED_PORTAL = "reached_portal"
    STUCK_AT_CMR = "stuck_at_cmr"
    DIED_IN_NETWORK = "died_in_network"


@dataclass(frozen=True)
class Hop:
    """One transmission of a message: who sent it, when, where and with what TTL."""
    node_id: int
    slot: int
    channel: int
    ttl: int
    parent: Optional[int] = None  # hop_trace index of the transmission the sender received


@dataclass
class Message:
    """
    A data unit travelling from a CR device toward a portal.

    ttl is the hop budget the message was injected with; each carrier holds
    its own remaining budget in a Carriage.
    """
    msg_id: int
    injector_cr: int
    ttl: int
    origin_pr: Optional[int] = None
    created_slot: int = 0
    injected_slot: Optional[int] = None
    hop_trace: List[Hop] = field(default_factory=list)
    carriers: Set[int] = field(default_factory=set)
    reached_cmr_neighbor: bool = False
    reached_cmr: bool = False
    reached_portal: bool = False
    hops_to_cmr: Optional[int] = None
    terminal: Optional[TerminalState] = None
    terminal_slot: Optional[int] = None

    @property
    def injected(self) -> bool:
        return self.injected_slot is not None

    def record_hop(self, node_id: int, slot: int, channel: int, ttl: int,
                   parent: Optional[int] = None) -> int:
        """
        Append a transmission to hop_trace.

        Returns:
            Index of the new hop

        Raises:
            InvalidArgumentError: The hop would break TTL safety or slot order
        """
        if ttl < 1:
            raise InvalidArgumentError(f"message {self.msg_id}: a carrier with ttl {ttl} cannot transmit")
        if parent is not None:
            before = self.hop_trace[parent]
            if ttl >= before.ttl or slot <= before.slot:
                raise InvalidArgumentError(
                    f"message {self.msg_id}: hop by {node_id} at slot {slot} ttl {ttl} "
                    f"does not follow hop {parent} (slot {before.slot}, ttl {before.ttl})"
                )
        self.hop_trace.append(Hop(node_id, slot, channel, ttl, parent))
        return len(self.hop_trace) - 1

    def hops_to(self, hop_index: int) -> int:
        """Number of transmissions from the injector up to and including hop_index."""
        count = 0
        index: Optional[int] = hop_index
        while index is not None:
            count += 1
            index = self.hop_trace[index].parent
        return count

    def finish(self, state: TerminalState, slot: int) -> None:
        """Mark the message terminal once."""
        if self.terminal is None:
            self.terminal = state
            self.terminal_slot = slot


@dataclass(frozen=True)
class Carriage:
    """A queued copy of a message at one CR, with that carrier's remaining TTL."""
    msg_id: int
    ttl: int
    parent: Optional[int] = None  # hop it was received from


@dataclass(frozen=True)
class Transmission:
    """One data transmission in one slot."""
    sender: int
    channel: int
    slot: int
    msg_id: Optional[int] = None
    ttl: Optional[int] = None
    hop_index: Optional[int] = None
