"""Channels and the primary-radio activity process."""

from typing import Dict, List, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..utils.config import ExperimentConfig
from ..utils.errors import InvalidArgumentError
from ..utils.seeding import STREAM_PR_ACTIVITY, stream


class ChannelModel(BaseModel):
    """One orthogonal spectrum band."""
    model_config = ConfigDict(frozen=True)

    channel_id: int = Field(ge=0)
    occupancy_prob: float = Field(ge=0.0, le=1.0)
    frequency_mhz: float = 0.0
    bandwidth_mhz: float = 0.0

    @property
    def frequency_label(self) -> str:
        """Nominal center frequency tag, e.g. ``473.0MHz``."""
        return f"{self.frequency_mhz:.1f}MHz"


def build_channels(config: ExperimentConfig) -> List[ChannelModel]:
    """
    Build the channel set of an experiment.

    Channel i is centered at base + (i + 0.5) * bandwidth.
    """
    bandwidth = config.channel_bandwidth_mhz
    return [
        ChannelModel(
            channel_id=i,
            occupancy_prob=p,
            frequency_mhz=config.base_frequency_mhz + (i + 0.5) * bandwidth,
            bandwidth_mhz=bandwidth,
        )
        for i, p in enumerate(config.occupancy_vector())
    ]


def uniform_channels(occupancy: Sequence[float]) -> List[ChannelModel]:
    """Channel set from bare occupancy probabilities (tests, small scenarios)."""
    return [ChannelModel(channel_id=i, occupancy_prob=float(p)) for i, p in enumerate(occupancy)]


class SlotUniforms:
    """
    One uniform draw per (node, slot), generated in chunks on demand.

    The value for node n at slot t is the t-th draw of the (seed, tag, n)
    stream, so it never depends on how far ahead was drawn.
    """

    CHUNK = 1024

    def __init__(self, seed: int, tag: int, node_ids: Sequence[int]):
        self.node_ids = [int(i) for i in node_ids]
        self.index: Dict[int, int] = {n: k for k, n in enumerate(self.node_ids)}
        self._streams = [stream(seed, tag, n) for n in self.node_ids]
        self._values = np.zeros((len(self.node_ids), 0))

    @property
    def horizon(self) -> int:
        """Number of slots drawn so far."""
        return self._values.shape[1]

    def ensure(self, slots: int) -> None:
        """Draw far enough that slots [0, slots) are known."""
        missing = slots - self.horizon
        if missing <= 0:
            return
        count = max(missing, self.CHUNK)
        fresh = np.array([rng.random(count) for rng in self._streams]).reshape(len(self._streams), count)
        self._values = np.concatenate([self._values, fresh], axis=1)

    def block(self, slots: int) -> np.ndarray:
        """(n, slots) draws for slots [0, slots)."""
        self.ensure(slots)
        return self._values[:, :slots]

    def column(self, slot: int) -> np.ndarray:
        """(n,) draws of one slot."""
        if slot < 0:
            raise InvalidArgumentError(f"slot must be >= 0, got {slot}")
        self.ensure(slot + 1)
        return self._values[:, slot]


class PrActivity:
    """
    Per-slot ON/OFF state of every PR node.

    PR n is active at slot t iff its (seed, n) uniform for t is below the
    occupancy_prob of its bound channel: independent Bernoulli slots that are
    replayable from (seed, slot, node id) and monotone in occupancy_prob.
    """

    def __init__(self, seed: int, pr_ids: Sequence[int], occupancy: Sequence[float]):
        """
        Args:
            seed: Run seed
            pr_ids: PR node ids
            occupancy: occupancy_prob of each PR's bound channel (same order)
        """
        if len(pr_ids) != len(occupancy):
            raise InvalidArgumentError("one occupancy value per PR node is required")
        self.seed = seed
        self.pr_ids = [int(i) for i in pr_ids]
        self.occupancy = np.asarray(occupancy, dtype=float)
        self._draws = SlotUniforms(seed, STREAM_PR_ACTIVITY, self.pr_ids)

    @property
    def horizon(self) -> int:
        return self._draws.horizon

    def matrix(self, slots: int) -> np.ndarray:
        """Boolean (n_pr, slots) activity matrix."""
        return self._draws.block(slots) < self.occupancy[:, None]

    def is_active(self, pr_id: int, slot: int) -> bool:
        """Whether a PR node transmits in a slot."""
        k = self._draws.index[pr_id]
        return bool(self._draws.column(slot)[k] < self.occupancy[k])
