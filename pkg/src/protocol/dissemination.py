"""TTL-limited multi-hop dissemination among CR devices."""

import logging
from collections import deque
from typing import Deque, Dict, List, Optional, Sequence, Set

import numpy as np

from ..spectrum.sensing import SpectrumModel
from ..strategy.selection import ChannelStrategy
from ..topology.deploy import cmr_neighborhood
from ..topology.models import Deployment, Role
from ..tracking.event_log import EventKind, EventLog
from ..utils.errors import InvalidArgumentError
from .medium import SlotOutcome, resolve_receptions
from .messages import Carriage, Message, Transmission

logger = logging.getLogger(__name__)


class Disseminator:
    """
    Per-slot dissemination state of the CR network.

    Every decision in slot t (transmit channel, listening channel) is made from
    the state at the end of slot t-1: the utilization sensed over the decision
    window and the channels CR neighbors were tuned to in the previous slot.
    Receptions of all transmissions are then applied together.
    """

    def __init__(self, deployment: Deployment, spectrum: SpectrumModel, strategy: ChannelStrategy,
                 rng: np.random.Generator, sensing_dwell: int = 10, queue_cap: int = 0,
                 reselect_prob: float = 0.0, log: Optional[EventLog] = None):
        """
        Args:
            deployment: Node placement
            spectrum: PR activity as seen from the deployment
            strategy: Channel-selection strategy
            rng: Strategy stream (RD picks and re-selection coins)
            sensing_dwell: Length of the decision window
            queue_cap: Max queued messages per CR (0 = unbounded)
            reselect_prob: Per-slot probability that an idle CR re-selects
            log: Event log (None = no logging)
        """
        if sensing_dwell < 1:
            raise InvalidArgumentError("sensing_dwell must be >= 1")
        self.spectrum = spectrum
        self.strategy = strategy
        self.rng = rng
        self.dwell = sensing_dwell
        self.queue_cap = queue_cap
        self.reselect_prob = reselect_prob
        self.log = log
        self.channels = spectrum.n_channels

        self.cr_ids: List[int] = deployment.ids(Role.CR_DEVICE)
        self.cmr_ids: List[int] = deployment.ids(Role.CMR)
        self._index: Dict[int, int] = {cr: k for k, cr in enumerate(self.cr_ids)}
        self.tuned = np.full(len(self.cr_ids), -1, dtype=int)
        self.previous = self.tuned.copy()
        self.cmr_channels: Dict[int, Set[int]] = {c: set() for c in self.cmr_ids}
        self.queues: Dict[int, Deque[Carriage]] = {cr: deque() for cr in self.cr_ids}
        self.messages: Dict[int, Message] = {}
        self.busy: Set[int] = set()
        self.collisions = 0
        self._queued: Dict[int, int] = {}
        self.set_deployment(deployment, spectrum)

    def set_deployment(self, deployment: Deployment, spectrum: Optional[SpectrumModel] = None) -> None:
        """Adopt new positions (mobility); queues and tuning are kept."""
        self.deployment = deployment
        if spectrum is not None:
            self.spectrum = spectrum
        graph = deployment.graph
        n = len(self.cr_ids)
        self._adjacency = np.zeros((n, n))
        self._cmr_adjacency = np.zeros((len(self.cmr_ids), n))
        for cr, k in self._index.items():
            for v in graph.neighbors(cr):
                if v in self._index:
                    self._adjacency[k, self._index[v]] = 1.0
        for row, cmr in enumerate(self.cmr_ids):
            for v in graph.neighbors(cmr):
                if v in self._index:
                    self._cmr_adjacency[row, self._index[v]] = 1.0
        self.neighborhood = cmr_neighborhood(deployment)

    # -- channel decisions -------------------------------------------------

    def _tuned_onehot(self) -> np.ndarray:
        onehot = np.zeros((len(self.cr_ids), self.channels))
        tuned = self.previous >= 0
        onehot[np.nonzero(tuned)[0], self.previous[tuned]] = 1.0
        return onehot

    def receivers(self, cr_ids: Sequence[int]) -> np.ndarray:
        """(n, C) CR neighbors tuned to each channel in the previous slot."""
        rows = [self._index[cr] for cr in cr_ids]
        return self._adjacency[rows] @ self._tuned_onehot()

    def decide(self, cr_ids: Sequence[int], slot: int) -> np.ndarray:
        """Strategy choice of every listed CR for slot."""
        if not cr_ids:
            return np.zeros(0, dtype=int)
        start, end = self.spectrum.decision_window(slot, self.dwell)
        utilization = self.spectrum.utilization(cr_ids, start, end)
        return np.asarray(self.strategy.select_many(utilization, self.receivers(cr_ids), self.rng), dtype=int)

    def select_listening(self, slot: int, force: bool = False, exclude: Sequence[int] = ()) -> None:
        """
        Let idle CRs (re-)select their listening channel.

        Args:
            slot: Current slot
            force: Every idle CR selects (the first selection)
            exclude: CRs busy transmitting this slot
        """
        skip = self.busy | set(exclude)
        idle = [cr for cr in self.cr_ids if cr not in skip]
        if not idle:
            return
        if not force:
            if self.reselect_prob <= 0.0:
                return
            coins = self.rng.random(len(idle)) < self.reselect_prob
            idle = [cr for cr, flip in zip(idle, coins) if flip]
            if not idle:
                return
        choices = self.decide(idle, slot)
        for cr, channel in zip(idle, choices):
            self.tuned[self._index[cr]] = channel

    def tune_cmrs(self, slot: int) -> Dict[int, Set[int]]:
        """
        Point each CMR's access radios at the channels with the most free
        listeners: score (1 - utilization) x tuned CR neighbors, then
        availability, then lowest id.
        """
        if not self.cmr_ids:
            return {}
        start, end = self.spectrum.decision_window(slot, self.dwell)
        availability = 1.0 - self.spectrum.utilization(self.cmr_ids, start, end)
        listeners = self._cmr_adjacency @ self._tuned_onehot()
        for row, cmr in enumerate(self.cmr_ids):
            radios = self.deployment.node(cmr).radio_count - 1
            score = availability[row] * listeners[row]
            order = sorted(range(self.channels), key=lambda c: (-score[c], -availability[row, c], c))
            self.cmr_channels[cmr] = set(order[:radios])
        return self.cmr_channels

    # -- message bookkeeping ----------------------------------------------

    def carried(self, node_id: int, msg_id: int) -> bool:
        return node_id in self.messages[msg_id].carriers

    def in_flight(self, msg_id: int) -> bool:
        """Whether some CR still queues the message."""
        return self._queued.get(msg_id, 0) > 0

    def _enqueue(self, cr_id: int, carriage: Carriage, slot: int) -> bool:
        queue = self.queues[cr_id]
        if self.queue_cap and len(queue) >= self.queue_cap:
            logger.debug(f"slot {slot}: CR {cr_id} queue full, message {carriage.msg_id} dropped")
            return False
        queue.append(carriage)
        self._queued[carriage.msg_id] = self._queued.get(carriage.msg_id, 0) + 1
        return True

    def pop_head(self, cr_id: int) -> Carriage:
        """Remove and return the head of a CR queue."""
        return self._dequeue(cr_id)

    def requeue(self, cr_id: int, carriage: Carriage) -> None:
        """Put a carriage back at the head of a CR queue."""
        self.queues[cr_id].appendleft(carriage)
        self._queued[carriage.msg_id] = self._queued.get(carriage.msg_id, 0) + 1

    def _dequeue(self, cr_id: int) -> Carriage:
        carriage = self.queues[cr_id].popleft()
        self._queued[carriage.msg_id] -= 1
        return carriage

    def reserve(self, cr_id: int) -> None:
        """Mark a CR's radio busy for the current slot (PR pickup)."""
        self.busy.add(cr_id)

    def inject(self, message: Message, slot: int) -> None:
        """Hand a message to its injector CR for transmission from slot on."""
        if message.injector_cr not in self._index:
            raise InvalidArgumentError(f"injector {message.injector_cr} is not a CR device")
        message.injected_slot = slot
        message.carriers.add(message.injector_cr)
        message.reached_cmr_neighbor = message.injector_cr in self.neighborhood
        self.messages[message.msg_id] = message
        if self.log is not None:
            self.log.record(slot, EventKind.INJECT, message.injector_cr, msg=message.msg_id, ttl=message.ttl,
                            peer=message.origin_pr)
        if message.ttl >= 1:
            self._enqueue(message.injector_cr, Carriage(message.msg_id, message.ttl), slot)

    # -- slots ---------------------------------------------------------------

    def _transmit(self, senders: Sequence[int], slot: int,
                  pick: Optional[Dict[int, Carriage]] = None) -> List[Transmission]:
        channels = self.decide(senders, slot)
        transmissions = []
        for cr, channel in zip(senders, channels):
            carriage = pick[cr] if pick else self._dequeue(cr)
            message = self.messages[carriage.msg_id]
            hop = message.record_hop(cr, slot, int(channel), carriage.ttl, carriage.parent)
            self.tuned[self._index[cr]] = channel
            transmissions.append(Transmission(cr, int(channel), slot, carriage.msg_id, carriage.ttl, hop))
            if self.log is not None:
                self.log.record(slot, EventKind.TX, cr, channel=int(channel), msg=carriage.msg_id, ttl=carriage.ttl)
        return transmissions

    def _listening(self, transmitting: Set[int]) -> Dict[int, Set[int]]:
        listening = {
            cr: {int(self.tuned[k])} for cr, k in self._index.items()
            if cr not in transmitting and cr not in self.busy and self.tuned[k] >= 0
        }
        listening.update({cmr: set(channels) for cmr, channels in self.cmr_channels.items()})
        return listening

    def _apply(self, outcome: SlotOutcome) -> None:
        slot = outcome.slot
        for reception in outcome.receptions:
            tx = reception.transmission
            v = reception.receiver
            message = self.messages[tx.msg_id]
            if v in message.carriers:
                continue  # same message heard on two CMR radios
            message.carriers.add(v)
            if v in self.neighborhood:
                message.reached_cmr_neighbor = True
            if v in self._index:
                if self.log is not None:
                    self.log.record(slot, EventKind.RX, v, channel=tx.channel, msg=tx.msg_id, ttl=tx.ttl - 1,
                                    peer=tx.sender)
                if tx.ttl - 1 >= 1:
                    self._enqueue(v, Carriage(tx.msg_id, tx.ttl - 1, tx.hop_index), slot)
            else:
                message.reached_cmr = True
                if message.hops_to_cmr is None:
                    message.hops_to_cmr = message.hops_to(tx.hop_index)
                outcome.cmr_deliveries.append((v, tx.msg_id))
                if self.log is not None:
                    self.log.record(slot, EventKind.CMR_RX, v, channel=tx.channel, msg=tx.msg_id, ttl=tx.ttl - 1,
                                    peer=tx.sender)
        for receiver, channel in outcome.collisions:
            if self.log is not None:
                self.log.record(slot, EventKind.COLLISION, receiver, channel=channel)
        for reception in outcome.blocked:
            if self.log is not None:
                tx = reception.transmission
                self.log.record(slot, EventKind.BLOCKED, reception.receiver, channel=tx.channel, msg=tx.msg_id,
                                peer=tx.sender)
        self.collisions += len(outcome.collisions)

    def _resolve(self, transmissions: List[Transmission], slot: int) -> SlotOutcome:
        transmitting = {tx.sender for tx in transmissions}
        outcome = resolve_receptions(self.deployment, self.spectrum, slot, transmissions,
                                     self._listening(transmitting), self.carried)
        self._apply(outcome)
        return outcome

    def end_slot(self) -> None:
        """Close a slot: the tuning becomes the previous-slot state, radios are freed."""
        self.previous = self.tuned.copy()
        self.busy.clear()

    def step(self, slot: int) -> SlotOutcome:
        """
        Run one dissemination slot: every CR with a queued message and a free
        radio transmits its queue head, idle CRs may re-select, then all
        receptions are applied at once.
        """
        senders = [cr for cr in self.cr_ids if self.queues[cr] and cr not in self.busy]
        transmissions = self._transmit(senders, slot)
        self.select_listening(slot, exclude=senders)
        outcome = self._resolve(transmissions, slot)
        self.end_slot()
        return outcome

    def idle_step(self, slot: int) -> None:
        """A slot without transmissions (selection window)."""
        self.select_listening(slot)
        self.end_slot()

    def disseminate_step(self, cr_id: int, msg_id: int, slot: int) -> Set[int]:
        """
        Let one CR transmit one message it holds, alone in the slot.

        Returns:
            Ids of the nodes that received it

        Raises:
            InvalidArgumentError: The CR holds no copy of the message
        """
        queue = self.queues.get(cr_id)
        if queue is None:
            raise InvalidArgumentError(f"node {cr_id} is not a CR device")
        carriage = next((c for c in queue if c.msg_id == msg_id), None)
        if carriage is None:
            raise InvalidArgumentError(f"CR {cr_id} holds no copy of message {msg_id}")
        queue.remove(carriage)
        self._queued[msg_id] -= 1
        transmissions = self._transmit([cr_id], slot, pick={cr_id: carriage})
        outcome = self._resolve(transmissions, slot)
        self.end_slot()
        return outcome.received_by(cr_id)
