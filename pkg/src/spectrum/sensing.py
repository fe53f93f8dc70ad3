"""Spectrum sensing: the busy predicate and per-channel utilization reports."""

import logging
from typing import Dict, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..topology.models import Deployment, Node, Role
from ..utils.errors import InvalidArgumentError
from .channels import ChannelModel, PrActivity

logger = logging.getLogger(__name__)


class SpectrumObservation(BaseModel):
    """What one node saw on one channel over a window of slots."""
    model_config = ConfigDict(frozen=True)

    observer_id: int
    observer_role: Role
    channel_id: int = Field(ge=0)
    utilization: float = Field(ge=0.0, le=1.0)
    window_start: int = Field(ge=0)
    window_end: int  # exclusive
    frequency_label: str = ""

    @model_validator(mode="after")
    def _check_window(self) -> "SpectrumObservation":
        if self.window_end <= self.window_start:
            raise ValueError("observation window must be non-empty")
        return self

    @property
    def window(self) -> range:
        return range(self.window_start, self.window_end)

    @property
    def observed_slots(self) -> int:
        return self.window_end - self.window_start

    @property
    def busy_slots(self) -> int:
        """Busy slot count (utilization is always a multiple of 1/window)."""
        return int(round(self.utilization * self.observed_slots))


class SpectrumModel:
    """
    PR occupancy as seen from the positions of a deployment.

    Busy sequences of observers are computed once for a horizon and kept as
    cumulative sums, so any window utilization is an O(1) lookup. The cached
    values are the same counts channel_busy produces slot by slot.
    """

    def __init__(self, deployment: Deployment, channels: Sequence[ChannelModel],
                 activity: Optional[PrActivity] = None):
        """
        Args:
            deployment: Node positions; PR nodes define the occupancy sources
            channels: Channel set (index == channel_id)
            activity: Shared PR activity (built from deployment.seed if omitted)
        """
        self.deployment = deployment
        self.channels = list(channels)
        self.n_channels = len(self.channels)
        prs = deployment.by_role(Role.PR_DEVICE)
        for pr in prs:
            if not 0 <= pr.channel < self.n_channels:
                raise InvalidArgumentError(f"PR {pr.node_id} bound to unknown channel {pr.channel}")
        self.pr_ids = [pr.node_id for pr in prs]
        self.pr_channel = np.array([pr.channel for pr in prs], dtype=int)
        self.pr_xy = deployment.positions(self.pr_ids)
        if activity is None:
            activity = PrActivity(
                deployment.seed, self.pr_ids,
                [self.channels[c].occupancy_prob for c in self.pr_channel],
            )
        self.activity = activity
        self._rows: Dict[int, int] = {}
        self._cum = np.zeros((0, self.n_channels, 1), dtype=np.int32)
        self._horizon = 0

    def _check_channel(self, channel_id: int) -> None:
        if not 0 <= channel_id < self.n_channels:
            raise InvalidArgumentError(f"unknown channel {channel_id}")

    def channel_busy(self, channel_id: int, slot: int, position: Sequence[float], range_m: float) -> bool:
        """
        True iff some PR bound to channel_id within range_m of position is active at slot.
        """
        self._check_channel(channel_id)
        on_channel = np.nonzero(self.pr_channel == channel_id)[0]
        if on_channel.size == 0:
            return False
        gap = np.hypot(self.pr_xy[on_channel, 0] - position[0], self.pr_xy[on_channel, 1] - position[1])
        for k in on_channel[gap <= range_m]:
            if self.activity.is_active(self.pr_ids[k], slot):
                return True
        return False

    def active_sources(self, channel_id: int, slot: int, position: Sequence[float], range_m: float) -> List[int]:
        """Ids of PRs bound to channel_id within range_m of position that are active at slot."""
        self._check_channel(channel_id)
        on_channel = np.nonzero(self.pr_channel == channel_id)[0]
        if on_channel.size == 0:
            return []
        gap = np.hypot(self.pr_xy[on_channel, 0] - position[0], self.pr_xy[on_channel, 1] - position[1])
        return [
            self.pr_ids[k] for k in on_channel[gap <= range_m]
            if self.activity.is_active(self.pr_ids[k], slot)
        ]

    def prepare(self, observer_ids: Sequence[int], horizon: int) -> None:
        """Cache busy sequences of the given observers for slots [0, horizon)."""
        ids = sorted(set(observer_ids) | set(self._rows))
        horizon = max(horizon, self._horizon, 1)
        active = self.activity.matrix(horizon).astype(np.float32)
        xy = self.deployment.positions(ids)
        reach = self.deployment.ranges(ids)

        busy = np.zeros((len(ids), self.n_channels, horizon), dtype=bool)
        if self.pr_ids and ids:
            gap = np.hypot(xy[:, None, 0] - self.pr_xy[None, :, 0], xy[:, None, 1] - self.pr_xy[None, :, 1])
            in_range = (gap <= reach[:, None]).astype(np.float32)
            for c in range(self.n_channels):
                cols = self.pr_channel == c
                if cols.any():
                    busy[:, c, :] = (in_range[:, cols] @ active[cols, :]) > 0

        cum = np.zeros((len(ids), self.n_channels, horizon + 1), dtype=np.int32)
        np.cumsum(busy, axis=2, out=cum[:, :, 1:])
        self._rows = {node_id: row for row, node_id in enumerate(ids)}
        self._cum = cum
        self._horizon = horizon

    def busy_counts(self, observer_ids: Sequence[int], start: int, end: int) -> np.ndarray:
        """Busy slot counts in [start, end) per observer and channel, shape (n, C)."""
        if end > self._horizon or any(i not in self._rows for i in observer_ids):
            self.prepare(observer_ids, max(end, 2 * self._horizon))
        rows = [self._rows[i] for i in observer_ids]
        return self._cum[rows, :, end] - self._cum[rows, :, start]

    def utilization(self, observer_ids: Sequence[int], start: int, end: int) -> np.ndarray:
        """Busy fraction over [start, end) per observer and channel, shape (n, C)."""
        if end <= start:
            raise InvalidArgumentError("utilization window must be non-empty")
        return self.busy_counts(observer_ids, start, end) / float(end - start)

    def busy_now(self, observer_ids: Sequence[int], slot: int) -> np.ndarray:
        """channel_busy at slot for each observer and channel, shape (n, C)."""
        return self.busy_counts(observer_ids, slot, slot + 1) > 0

    def decision_window(self, slot: int, dwell: int) -> tuple:
        """Window a node senses before deciding at slot: [max(0, slot-dwell), slot), or [0, 1) at slot 0."""
        if slot <= 0:
            return 0, 1
        return max(0, slot - dwell), slot


def sense_spectrum(model: SpectrumModel, observer: Node, slot: int, dwell: int) -> List[SpectrumObservation]:
    """
    Observe every channel for dwell slots starting at slot.

    Sensing is perfect within the observer's range: utilization is the fraction
    of slots in [slot, slot + dwell) where channel_busy holds at the observer.

    Args:
        model: Spectrum model of the run
        observer: Sensing node
        slot: First slot of the window
        dwell: Window length in slots

    Returns:
        One observation per channel, in channel order

    Raises:
        InvalidArgumentError: dwell < 1 or slot < 0
    """
    if dwell < 1:
        raise InvalidArgumentError(f"dwell must be >= 1, got {dwell}")
    if slot < 0:
        raise InvalidArgumentError(f"slot must be >= 0, got {slot}")
    counts = model.busy_counts([observer.node_id], slot, slot + dwell)[0]
    return [
        SpectrumObservation(
            observer_id=observer.node_id,
            observer_role=observer.role,
            channel_id=channel.channel_id,
            utilization=float(counts[channel.channel_id]) / dwell,
            window_start=slot,
            window_end=slot + dwell,
            frequency_label=channel.frequency_label,
        )
        for channel in model.channels
    ]
