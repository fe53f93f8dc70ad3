"""Spectrum Fluctuation Monitor and the CMR spectrum opportunity database."""

import logging
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..spectrum.sensing import SpectrumObservation
from ..topology.models import Role
from ..utils.config import MapMode
from ..utils.errors import InvalidArgumentError, ModeViolationError, NoAssignmentError

logger = logging.getLogger(__name__)


class ChannelRecord(BaseModel):
    """Accumulated evidence about one channel."""
    model_config = ConfigDict(frozen=True)

    busy_slots: int = Field(default=0, ge=0)
    observed_slots: int = Field(default=0, ge=0)
    last_updated: Optional[int] = None

    @property
    def occupancy_estimate(self) -> float:
        """Total busy time over total observed time (0.0 while unknown)."""
        if self.observed_slots == 0:
            return 0.0
        return self.busy_slots / self.observed_slots

    @property
    def sample_count(self) -> int:
        return self.observed_slots

    @property
    def known(self) -> bool:
        return self.observed_slots > 0


class OpportunityMap(BaseModel):
    """Per-channel availability estimates maintained by one CMR."""
    model_config = ConfigDict(frozen=True)

    owner: int
    mode: MapMode = MapMode.STANDALONE
    records: Tuple[ChannelRecord, ...] = ()

    @classmethod
    def empty(cls, owner: int, channels: int, mode: MapMode = MapMode.STANDALONE) -> "OpportunityMap":
        """A map with no evidence on any channel."""
        return cls(owner=owner, mode=mode, records=tuple(ChannelRecord() for _ in range(channels)))

    @property
    def channels(self) -> int:
        return len(self.records)

    def estimates(self) -> np.ndarray:
        return np.array([r.occupancy_estimate for r in self.records], dtype=float)

    def unknown_channels(self) -> List[int]:
        """Channels without any observed slot."""
        return [i for i, r in enumerate(self.records) if not r.known]

    def accepts(self, observation: SpectrumObservation) -> bool:
        """Whether this map's mode admits an observation's source."""
        if observation.observer_id == self.owner:
            return True
        if observation.observer_role == Role.CMR:
            # CMR-to-CMR sharing is allowed in both modes
            return True
        return observation.observer_role == Role.CR_DEVICE and self.mode == MapMode.COORDINATED


def fluctuation_monitor_update(opportunity_map: OpportunityMap,
                               observations: Iterable[SpectrumObservation]) -> OpportunityMap:
    """
    Fold sensing reports into an opportunity map.

    Per channel, the estimate is the weighted running mean busy-time /
    observed-time over every ingested observation, so the result depends only
    on the multiset of observations, never on their order.

    Args:
        opportunity_map: Current map
        observations: New reports

    Returns:
        Updated map (the input is left untouched)

    Raises:
        ModeViolationError: A STANDALONE map is offered CR feedback, or any map
            is offered a report from a PR device or portal
        InvalidArgumentError: A report names a channel outside the map
    """
    observations = list(observations)
    for obs in observations:
        if not 0 <= obs.channel_id < opportunity_map.channels:
            raise InvalidArgumentError(f"observation for unknown channel {obs.channel_id}")
        if not opportunity_map.accepts(obs):
            raise ModeViolationError(
                f"{opportunity_map.mode.value} map of CMR {opportunity_map.owner} cannot ingest "
                f"a report from {obs.observer_role.value} {obs.observer_id}"
            )

    busy = [r.busy_slots for r in opportunity_map.records]
    observed = [r.observed_slots for r in opportunity_map.records]
    updated = [r.last_updated for r in opportunity_map.records]
    for obs in observations:
        c = obs.channel_id
        busy[c] += obs.busy_slots
        observed[c] += obs.observed_slots
        last = obs.window_end - 1
        updated[c] = last if updated[c] is None else max(updated[c], last)

    records = tuple(
        ChannelRecord(busy_slots=b, observed_slots=o, last_updated=u)
        for b, o, u in zip(busy, observed, updated)
    )
    return opportunity_map.model_copy(update={"records": records})


def eligible_channels(opportunity_map: OpportunityMap, busy_threshold: float = 0.5) -> List[int]:
    """Channels whose estimate is below the busy threshold, freest first (ties: lowest id).

    A channel with no observations has estimate 0.0 and so counts as free.
    """
    candidates = [
        (r.occupancy_estimate, i) for i, r in enumerate(opportunity_map.records)
        if r.occupancy_estimate < busy_threshold
    ]
    return [i for _, i in sorted(candidates)]


def cmr_assign_channels(opportunity_map: OpportunityMap, cr_ids: Sequence[int],
                        busy_threshold: float = 0.5) -> Dict[int, int]:
    """
    Spread a CMR's CR devices over its free channels.

    CRs are dealt round-robin over the eligible channels sorted by ascending
    estimate, so per-channel loads differ by at most one and the freer channels
    take the extra CRs.

    Args:
        opportunity_map: The CMR's map
        cr_ids: CRs to assign, in dealing order
        busy_threshold: Channels at or above this estimate are not used

    Returns:
        Mapping cr_id -> channel

    Raises:
        NoAssignmentError: No channel below the threshold
    """
    eligible = eligible_channels(opportunity_map, busy_threshold)
    if not eligible:
        raise NoAssignmentError(
            f"CMR {opportunity_map.owner}: no channel below busy threshold {busy_threshold}"
        )
    return {cr: eligible[k % len(eligible)] for k, cr in enumerate(cr_ids)}
