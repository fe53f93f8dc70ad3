"""The slotted simulation loop and seeded replications."""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

from ..protocol.cmr import Backbone, CmrPoller, Grant, associate_crs, build_pollers, cmr_poll, cmr_relay
from ..protocol.discovery import (
    InfrastructureRegistry,
    PrDataSource,
    discover_infrastructure,
    has_pickup_work,
    pickup_pr_data,
)
from ..protocol.dissemination import Disseminator
from ..protocol.messages import Message, TerminalState
from ..spectrum.channels import PrActivity, build_channels
from ..spectrum.sensing import SpectrumModel, SpectrumObservation, sense_spectrum
from ..strategy.opportunity import OpportunityMap, cmr_assign_channels, fluctuation_monitor_update
from ..strategy.selection import get_strategy
from ..topology.deploy import RandomWaypoint, deploy_random
from ..topology.models import Deployment, Role
from ..tracking.event_log import EventKind, EventLog
from ..utils.config import ExperimentConfig, MapMode, Mode
from ..utils.errors import NoAssignmentError
from ..utils.logging import configure_worker
from ..utils.seeding import STREAM_INJECTION, STREAM_STRATEGY, replication_seed, stream
from .metrics import ReplicationMetrics, RunMetrics

logger = logging.getLogger(__name__)


@dataclass
class ReplicationResult:
    """Everything one replication produced."""
    replication: int
    seed: int
    deployment: Deployment
    messages: List[Message]
    collisions: int
    metrics: ReplicationMetrics
    log: Optional[EventLog] = None


@dataclass
class _PollingState:
    members: Dict[int, List[int]]
    pollers: Dict[int, CmrPoller]
    maps: Dict[int, OpportunityMap]
    home: Dict[int, int]
    feedback: Dict[int, List[SpectrumObservation]] = field(default_factory=dict)


class Simulation:
    """
    One replication: deploy, discover, select, disseminate.

    Slots [0, D) are the discovery window, [D, W) the selection window and
    [W, W + slots) the dissemination window, where D = discovery_window and
    W = warmup_slots of the config.
    """

    def __init__(self, config: ExperimentConfig, seed: Optional[int] = None,
                 deployment: Optional[Deployment] = None, log: Optional[EventLog] = None,
                 replication: int = 0):
        """
        Args:
            config: Experiment configuration
            seed: Replication seed (defaults to config.seed)
            deployment: Fixed deployment (drawn from the seed if omitted)
            log: Event log to fill (None = no event log)
            replication: Replication index, for reporting
        """
        self.config = config
        self.seed = config.seed if seed is None else seed
        self.replication = replication
        self.log = log
        self.deployment = deployment if deployment is not None else deploy_random(config, self.seed)

        channels = build_channels(config)
        prs = self.deployment.by_role(Role.PR_DEVICE)
        self.activity = PrActivity(self.seed, [p.node_id for p in prs],
                                   [channels[p.channel].occupancy_prob for p in prs])
        self.channels = channels
        self.spectrum = SpectrumModel(self.deployment, channels, self.activity)

        self.cr_ids = self.deployment.ids(Role.CR_DEVICE)
        self.cmr_ids = self.deployment.ids(Role.CMR)
        self.discovery_end = config.discovery_window
        self.warmup_end = config.warmup_slots
        self.horizon = self.warmup_end + config.slots
        self.spectrum.prepare(self.cr_ids + self.cmr_ids, self.horizon)

        self.registry = InfrastructureRegistry()
        self.data = PrDataSource(self.seed, [p.node_id for p in prs], config.pr_data_rate)
        self.disseminator = Disseminator(
            self.deployment, self.spectrum, get_strategy(config.strategy), stream(self.seed, STREAM_STRATEGY),
            sensing_dwell=config.sensing_dwell, queue_cap=config.queue_cap,
            reselect_prob=config.reselect_prob, log=log,
        )
        self.backbone = Backbone(log)
        self._injection_rng = stream(self.seed, STREAM_INJECTION)
        self._mobility = RandomWaypoint(self.deployment, config.cr_speed, self.seed) if config.cr_mobile else None
        self._last_move = self.warmup_end
        self.held: Dict[int, Message] = {}
        self.active: List[Message] = []
        self.messages: List[Message] = []
        self.injected = 0
        self._next_msg_id = 0
        self._deferred = False
        self.polling: Optional[_PollingState] = None

    # -- phases ------------------------------------------------------------

    def _discover(self, slot: int) -> None:
        for cr in self.cr_ids:
            discover_infrastructure(self.registry, self.deployment, cr, slot,
                                    self.config.channels, self.config.beacon_period, self.log)

    def _pickups(self, slot: int, granted: Dict[int, Grant]) -> None:
        single_radio = self.config.cr_radios == 1
        for cr in self.cr_ids:
            if cr in self.held or cr in granted or self.disseminator.queues[cr]:
                continue
            if not has_pickup_work(self.deployment, cr, self.registry, self.data):
                continue
            message = pickup_pr_data(self.deployment, cr, self.registry, slot, self.spectrum, self.data,
                                     self.config.ttl_init, self._next_msg_id, self.log)
            if single_radio:
                self.disseminator.reserve(cr)
            if message is not None:
                self._next_msg_id += 1
                self.held[cr] = message

    def _should_inject(self, slot: int) -> bool:
        if self.injected >= self.config.messages:
            return False
        interval = self.config.injection_interval
        if interval > 0:
            return self._deferred or (slot - self.warmup_end) % interval == 0
        return not self.active

    def _inject(self, slot: int) -> None:
        holders = sorted(self.held)
        if not holders:
            if not self._deferred:
                logger.warning(f"slot {slot}: no CR holds PR data, injection deferred")
            self._deferred = True
            return
        self._deferred = False
        if self._mobility is not None and not self.active:
            self._move(slot)
        injector = holders[int(self._injection_rng.integers(len(holders)))]
        message = self.held.pop(injector)
        self.disseminator.inject(message, slot)
        self.messages.append(message)
        self.active.append(message)
        self.injected += 1
        if self.polling is not None and injector not in self.polling.home:
            self.disseminator.pop_head(injector)
            logger.debug(f"message {message.msg_id}: injector {injector} has no CMR to poll it")

    def _move(self, slot: int) -> None:
        """Random-waypoint step of the mobile CRs, between dissemination rounds."""
        moved = self._mobility.advance(self.deployment, slot - self._last_move)
        self._last_move = slot
        if moved is self.deployment:
            return
        self.deployment = moved
        self.spectrum = SpectrumModel(moved, self.channels, self.activity)
        self.spectrum.prepare(self.cr_ids + self.cmr_ids, self.horizon)
        self.disseminator.set_deployment(moved, self.spectrum)
        if self.polling is not None:
            self._setup_polling()

    def _relay_arrivals(self, slot: int) -> None:
        for action in self.backbone.advance(slot):
            message = self.disseminator.messages[action.msg_id]
            message.reached_portal = True
            self._finish(message, TerminalState.REACHED_PORTAL, slot)

    def _start_relays(self, deliveries, slot: int) -> None:
        for cmr, msg_id in deliveries:
            self.backbone.start(cmr_relay(self.deployment, cmr, msg_id, slot))

    def _finish(self, message: Message, state: TerminalState, slot: int) -> None:
        if message.terminal is not None:
            return
        message.finish(state, slot)
        if message in self.active:
            self.active.remove(message)
        if state == TerminalState.STUCK_AT_CMR:
            logger.warning(f"message {message.msg_id} stuck at a CMR")
        logger.debug(f"message {message.msg_id}: {state.value} at slot {slot}")
        if self.log is not None:
            self.log.record(slot, EventKind.TERMINAL, message.injector_cr, msg=message.msg_id, note=state.value)

    def _settle(self, slot: int) -> None:
        for message in list(self.active):
            if self.disseminator.in_flight(message.msg_id) or self.backbone.in_transit(message.msg_id):
                continue
            state = TerminalState.STUCK_AT_CMR if message.reached_cmr else TerminalState.DIED_IN_NETWORK
            self._finish(message, state, slot)

    # -- single-hop polling ------------------------------------------------

    def _setup_polling(self) -> None:
        members = associate_crs(self.deployment)
        home = {cr: cmr for cmr, crs in members.items() for cr in crs}
        if self.polling is None:
            maps = {c: OpportunityMap.empty(c, self.config.channels, self.config.cmr_map_mode) for c in self.cmr_ids}
            self.polling = _PollingState(members, build_pollers(self.deployment, self.cmr_ids), maps, home,
                                         {c: [] for c in self.cmr_ids})
        else:
            self.polling.members = members
            self.polling.home = home

    def _assign(self, slot: int) -> None:
        """Epoch update of every CMR's opportunity map and channel assignment."""
        polling = self.polling
        start = max(0, slot - self.config.assignment_epoch)
        length = max(1, slot - start)
        own = {c: sense_spectrum(self.spectrum, self.deployment.node(c), start, length) for c in self.cmr_ids}
        backbone = self.deployment.backbone
        for cmr in self.cmr_ids:
            reports = list(own[cmr])
            if self.config.cmr_share_observations:
                for peer in sorted(backbone.neighbors(cmr)):
                    if peer in own:
                        reports.extend(own[peer])
            if self.config.cmr_map_mode == MapMode.COORDINATED:
                reports.extend(polling.feedback[cmr])
            polling.feedback[cmr] = []
            polling.maps[cmr] = fluctuation_monitor_update(polling.maps[cmr], reports)
            try:
                assignment = cmr_assign_channels(polling.maps[cmr], polling.members[cmr], self.config.busy_threshold)
            except NoAssignmentError as e:
                logger.warning(f"slot {slot}: {e}")
                assignment = {}
            polling.pollers[cmr].assign(assignment)

    def _poll(self, slot: int) -> Dict[int, Grant]:
        """Issue this slot's grants and carry out the granted transmissions."""
        polling = self.polling
        granted: Dict[int, Grant] = {}
        for cmr in self.cmr_ids:
            for grant in cmr_poll(polling.pollers[cmr], slot, self.log):
                granted[grant.cr_id] = grant
        for cr, grant in sorted(granted.items()):
            cmr = polling.home.get(cr)
            if cmr is None:
                continue
            node = self.deployment.node(cr)
            if self.disseminator.queues[cr]:
                self._poll_data(cr, cmr, grant, node, slot)
            elif self.config.cmr_map_mode == MapMode.COORDINATED:
                start, end = self.spectrum.decision_window(slot, self.config.sensing_dwell)
                polling.feedback[cmr].extend(sense_spectrum(self.spectrum, node, start, end - start))
                if self.log is not None:
                    self.log.record(slot, EventKind.FEEDBACK, cr, channel=grant.channel, peer=cmr)
        return granted

    def _poll_data(self, cr: int, cmr: int, grant: Grant, node, slot: int) -> None:
        if self.spectrum.channel_busy(grant.channel, slot, node.position, node.range_m):
            return  # the CR defers to PR activity and keeps its message
        carriage = self.disseminator.pop_head(cr)
        message = self.disseminator.messages[carriage.msg_id]
        message.record_hop(cr, slot, grant.channel, carriage.ttl, carriage.parent)
        if self.log is not None:
            self.log.record(slot, EventKind.TX, cr, channel=grant.channel, msg=message.msg_id, ttl=carriage.ttl)
        sink = self.deployment.node(cmr)
        if self.spectrum.channel_busy(grant.channel, slot, sink.position, sink.range_m):
            if self.log is not None:
                self.log.record(slot, EventKind.BLOCKED, cmr, channel=grant.channel, msg=message.msg_id, peer=cr)
            return
        message.carriers.add(cmr)
        message.reached_cmr_neighbor = True
        message.reached_cmr = True
        if message.hops_to_cmr is None:
            message.hops_to_cmr = message.hops_to(len(message.hop_trace) - 1)
        if self.log is not None:
            self.log.record(slot, EventKind.CMR_RX, cmr, channel=grant.channel, msg=message.msg_id,
                            ttl=carriage.ttl - 1, peer=cr)
        self._start_relays([(cmr, message.msg_id)], slot)

    # -- main loop -----------------------------------------------------------

    def _epoch(self, slot: int) -> bool:
        return (slot - self.discovery_end - 1) % self.config.assignment_epoch == 0

    def run(self) -> ReplicationResult:
        """Run the replication to the end of its slot budget (or until every message is terminal)."""
        config = self.config
        single_hop = config.mode == Mode.SINGLE_HOP
        if single_hop:
            self._setup_polling()

        for slot in range(self.discovery_end):
            self._discover(slot)

        slot = self.discovery_end
        for slot in range(self.discovery_end, self.horizon):
            self.data.generate(slot)
            if slot > self.discovery_end and self._epoch(slot):
                if single_hop:
                    self._assign(slot)
                else:
                    self.disseminator.tune_cmrs(slot)
            granted = self._poll(slot) if single_hop and slot > self.discovery_end else {}
            self._pickups(slot, granted)

            if slot == self.discovery_end:
                self.disseminator.select_listening(slot, force=True)
                self.disseminator.end_slot()
                continue
            if slot < self.warmup_end:
                if not single_hop:
                    self.disseminator.idle_step(slot)
                else:
                    self.disseminator.end_slot()
                continue

            if self._should_inject(slot):
                self._inject(slot)
            self._relay_arrivals(slot)
            if single_hop:
                self.disseminator.end_slot()
            else:
                outcome = self.disseminator.step(slot)
                self._start_relays(outcome.cmr_deliveries, slot)
            self._settle(slot)
            if self.injected >= config.messages and not self.active:
                break

        for message in list(self.active):
            state = TerminalState.STUCK_AT_CMR if message.reached_cmr else TerminalState.DIED_IN_NETWORK
            self._finish(message, state, slot)

        metrics = ReplicationMetrics.from_messages(self.messages, self.disseminator.collisions,
                                                   self.replication, self.seed)
        if self.log is not None:
            self.log.header.update({
                "seed": str(self.seed),
                "mode": config.mode.value,
                "mobile": "1" if config.cr_mobile else "0",
                "injected": str(metrics.injected),
                "delivery_ratio_cmr_neighbor": f"{metrics.delivery_ratio_cmr_neighbor:.6f}",
                "delivery_ratio_cmr": f"{metrics.delivery_ratio_cmr:.6f}",
                "delivery_ratio_portal": f"{metrics.delivery_ratio_portal:.6f}",
            })
        return ReplicationResult(self.replication, self.seed, self.deployment, self.messages,
                                 self.disseminator.collisions, metrics, self.log)


def run_replication(config: ExperimentConfig, replication: int, with_log: bool = False) -> ReplicationResult:
    """Run replication r with its derived seed."""
    seed = replication_seed(config.seed, replication)
    log = EventLog() if with_log else None
    result = Simulation(config, seed=seed, log=log, replication=replication).run()
    logger.info(
        f"replication {replication} (seed {seed}): injected {result.metrics.injected}, "
        f"cmr_neighbor {result.metrics.delivery_ratio_cmr_neighbor:.3f}, "
        f"portal {result.metrics.delivery_ratio_portal:.3f}"
    )
    return result


def _replication_metrics(args) -> ReplicationMetrics:
    config, replication = args
    return run_replication(config, replication).metrics


def run(config: ExperimentConfig) -> RunMetrics:
    """
    Run every replication of an experiment and aggregate.

    Replication r uses seed replication_seed(config.seed, r), so the result is
    a pure function of the config. With workers > 1 replications run in a
    process pool; results are joined in replication order.

    Raises:
        UndefinedMetricError: No replication injected any message
    """
    return run_many([config])[0]


def run_many(configs: Sequence[ExperimentConfig]) -> List[RunMetrics]:
    """
    Run several experiments, sharing one process pool across all their replications.

    The pool size is the largest workers value among the configs. Each
    experiment is aggregated on its own, so the results equal calling run()
    on every config in turn.

    Args:
        configs: Experiments to run

    Returns:
        One RunMetrics per config, in input order

    Raises:
        UndefinedMetricError: An experiment in which no replication injected any message
    """
    jobs = [(config, r) for config in configs for r in range(config.replications)]
    workers = max((config.workers for config in configs), default=1)
    if workers > 1 and len(jobs) > 1:
        logger.info(f"running {len(jobs)} replications of {len(configs)} experiment(s) on {workers} workers")
        with ProcessPoolExecutor(max_workers=workers, initializer=configure_worker,
                                 initargs=(logging.getLogger().level,)) as pool:
            metrics = list(pool.map(_replication_metrics, jobs))
    else:
        metrics = [_replication_metrics(job) for job in jobs]

    results: List[RunMetrics] = []
    start = 0
    for config in configs:
        results.append(RunMetrics.aggregate(metrics[start:start + config.replications]))
        start += config.replications
    return results
