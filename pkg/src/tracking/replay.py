"""Independent verification of an event log against its deployment."""

import logging
from pathlib import Path
from typing import Dict, List, Set, Tuple, Union

from pydantic import BaseModel, Field

from ..topology.deploy import cmr_neighborhood, load_deployment
from ..topology.models import Deployment
from .event_log import Event, EventKind, EventLog

logger = logging.getLogger(__name__)

RATIO_KEYS = ("delivery_ratio_cmr_neighbor", "delivery_ratio_cmr", "delivery_ratio_portal")


class Violation(BaseModel):
    """A broken protocol rule, located at a log line."""
    line: int
    check: str
    message: str

    def __str__(self) -> str:
        return f"line {self.line}: [{self.check}] {self.message}"


class ReplayReport(BaseModel):
    """Outcome of replaying one event log."""
    events: int = 0
    messages: int = 0
    violations: List[Violation] = Field(default_factory=list)
    recount: Dict[str, float] = Field(default_factory=dict)
    reported: Dict[str, float] = Field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.violations

    def summary(self) -> str:
        lines = [f"{self.events} events, {self.messages} messages, {len(self.violations)} violation(s)"]
        for key in RATIO_KEYS:
            if key in self.recount:
                reported = self.reported.get(key)
                shown = "-" if reported is None else f"{reported:.6f}"
                lines.append(f"  {key}: recount {self.recount[key]:.6f} reported {shown}")
        lines.extend(f"  {v}" for v in self.violations)
        return "\n".join(lines)


class ReplayChecker:
    """Re-derives TTL, duplicate, collision and delivery predicates from a log."""

    def __init__(self, deployment: Deployment, log: EventLog):
        self.deployment = deployment
        self.log = log
        self.graph = deployment.graph
        # positions of a mobile run are not in the deployment file
        self.geometric = log.header.get("mobile", "0") in ("0", "false")
        self.violations: List[Violation] = []

    def _flag(self, index: int, check: str, message: str) -> None:
        self.violations.append(Violation(line=self.log.line_of(index), check=check, message=message))

    def check(self) -> ReplayReport:
        events = self.log.events
        transmissions: Dict[Tuple[int, int, int], Event] = {}
        on_air: Dict[Tuple[int, int], List[int]] = {}
        for e in events:
            if e.kind == EventKind.TX:
                transmissions[(e.slot, e.msg, e.node)] = e
                on_air.setdefault((e.slot, e.channel), []).append(e.node)

        injected: Dict[int, Tuple[int, int]] = {}
        carriers: Dict[int, Set[int]] = {}
        held: Dict[Tuple[int, int], Tuple[int, int]] = {}  # (msg, node) -> (ttl, slot)
        sent: Set[Tuple[int, int]] = set()
        grants: Set[Tuple[int, int]] = set()
        at_cmr: Set[int] = set()
        at_portal: Set[int] = set()

        for index, e in enumerate(events):
            if e.kind == EventKind.INJECT:
                injected[e.msg] = (e.node, e.ttl)
                carriers.setdefault(e.msg, set()).add(e.node)
            elif e.kind == EventKind.TX:
                self._check_tx(index, e, injected, held, sent)
            elif e.kind in (EventKind.RX, EventKind.CMR_RX):
                self._check_rx(index, e, transmissions, on_air, carriers)
                if e.kind == EventKind.RX:
                    held[(e.msg, e.node)] = (e.ttl, e.slot)
                else:
                    at_cmr.add(e.msg)
            elif e.kind == EventKind.GRANT:
                if (e.slot, e.channel) in grants:
                    self._flag(index, "polling", f"second grant on channel {e.channel} in slot {e.slot}")
                grants.add((e.slot, e.channel))
            elif e.kind == EventKind.PORTAL:
                at_portal.add(e.msg)

        recount = self._recount(injected, carriers, at_cmr, at_portal)
        reported = {k: float(self.log.header[k]) for k in RATIO_KEYS if k in self.log.header}
        for key, value in reported.items():
            if key in recount and abs(recount[key] - value) > 5e-7:
                self.violations.append(Violation(
                    line=1, check="delivery",
                    message=f"{key} reported {value:.6f} but the log gives {recount[key]:.6f}",
                ))
        return ReplayReport(events=len(events), messages=len(injected), violations=self.violations,
                            recount=recount, reported=reported)

    def _check_tx(self, index: int, e: Event, injected, held, sent) -> None:
        if (e.msg, e.node) in sent:
            self._flag(index, "duplicate", f"node {e.node} transmits message {e.msg} twice")
        sent.add((e.msg, e.node))
        if e.ttl is None or e.ttl < 1:
            self._flag(index, "ttl", f"node {e.node} transmits message {e.msg} with ttl {e.ttl}")
            return
        origin = injected.get(e.msg)
        if origin is None:
            self._flag(index, "ttl", f"message {e.msg} transmitted before injection")
        elif origin[0] == e.node:
            if e.ttl != origin[1]:
                self._flag(index, "ttl", f"injector {e.node} sends ttl {e.ttl}, injected with {origin[1]}")
        else:
            got = held.get((e.msg, e.node))
            if got is None or got[1] >= e.slot:
                self._flag(index, "ttl", f"node {e.node} forwards message {e.msg} it never received")
            elif e.ttl != got[0]:
                self._flag(index, "ttl", f"node {e.node} forwards ttl {e.ttl} after receiving ttl {got[0]}")

    def _check_rx(self, index: int, e: Event, transmissions, on_air, carriers) -> None:
        tx = transmissions.get((e.slot, e.msg, e.peer))
        if tx is None:
            self._flag(index, "reception", f"node {e.node} receives message {e.msg} nobody sent from {e.peer}")
            return
        if e.ttl != tx.ttl - 1:
            self._flag(index, "ttl", f"received ttl {e.ttl} does not follow sent ttl {tx.ttl}")
        if e.channel != tx.channel:
            self._flag(index, "reception", f"received on channel {e.channel}, sent on {tx.channel}")
        known = carriers.setdefault(e.msg, set())
        if e.node in known:
            self._flag(index, "duplicate", f"node {e.node} receives message {e.msg} again")
        known.add(e.node)
        if not self.geometric:
            return
        if not self.graph.has_edge(e.peer, e.node):
            self._flag(index, "reception", f"node {e.node} is out of range of sender {e.peer}")
        rivals = [s for s in on_air.get((e.slot, tx.channel), []) if s != e.peer and self.graph.has_edge(s, e.node)]
        if rivals:
            self._flag(index, "collision", f"node {e.node} receives despite {len(rivals)} overlapping sender(s)")

    def _recount(self, injected, carriers, at_cmr, at_portal) -> Dict[str, float]:
        if not injected:
            return {}
        n = len(injected)
        recount = {
            "delivery_ratio_cmr": sum(1 for m in injected if m in at_cmr) / n,
            "delivery_ratio_portal": sum(1 for m in injected if m in at_portal) / n,
        }
        if self.geometric:
            # CMR neighborhoods of a mobile run change between rounds
            near = cmr_neighborhood(self.deployment)
            recount["delivery_ratio_cmr_neighbor"] = sum(1 for m in injected if carriers.get(m, set()) & near) / n
        return recount


def replay(deployment: Deployment, log: EventLog) -> ReplayReport:
    """Verify a log; violations carry the log line they were found at."""
    report = ReplayChecker(deployment, log).check()
    logger.info(f"replay: {len(report.violations)} violation(s) in {report.events} events")
    return report


def replay_files(deployment_path: Union[str, Path], log_path: Union[str, Path]) -> ReplayReport:
    """
    Load a deployment file and an event log, then verify.

    Raises:
        LogParseError: A malformed line in either file
        OSError: A file cannot be read
    """
    deployment = load_deployment(Path(deployment_path).read_text(encoding="utf-8"), str(deployment_path))
    return replay(deployment, EventLog.load(log_path))
