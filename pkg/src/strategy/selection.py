"""Channel-selection strategies for CR devices.

The SURF-like weight is a reconstruction: the published strategy considers both
PR activity and the number of CR receivers on a channel, and the simplest
formula honoring both is

    weight(i) = (1 - utilization(i)) * receivers(i)

The strategy is isolated behind ChannelStrategy so a different weight can be
swapped in without touching the protocol.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Dict, List, Sequence, Type, Union

import numpy as np

from ..utils.errors import ConfigError, InvalidArgumentError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ChannelWeight:
    """SURF-like score of one channel."""
    channel_id: int
    availability: float  # 1 - observed utilization
    receivers: int
    weight: float


def _utilization_vector(observations: Sequence) -> np.ndarray:
    """Accept plain utilizations or SpectrumObservation-like objects."""
    if observations and hasattr(observations[0], "utilization"):
        ordered = sorted(observations, key=lambda o: o.channel_id)
        return np.array([o.utilization for o in ordered], dtype=float)
    return np.asarray(observations, dtype=float)


def channel_weights(utilization: Sequence[float], receivers: Sequence[int]) -> List[ChannelWeight]:
    """
    Score every channel.

    Args:
        utilization: Observed busy fraction per channel
        receivers: CR neighbors tuned to each channel

    Returns:
        One ChannelWeight per channel
    """
    util = _utilization_vector(utilization)
    recv = np.asarray(receivers, dtype=int)
    if util.shape != recv.shape:
        raise InvalidArgumentError("utilization and receivers must cover the same channels")
    return [
        ChannelWeight(channel_id=i, availability=1.0 - u, receivers=int(r), weight=(1.0 - u) * int(r))
        for i, (u, r) in enumerate(zip(util, recv))
    ]


def surf_choice(utilization: np.ndarray, receivers: np.ndarray) -> np.ndarray:
    """
    Vectorized SURF-like choice for a batch of deciding nodes.

    Args:
        utilization: (n, C) busy fractions
        receivers: (n, C) receiver counts

    Returns:
        (n,) selected channel per node: argmax of (1 - u) * receivers, falling
        back to argmax of (1 - u) when every weight is zero; ties go to the
        lowest channel id
    """
    availability = 1.0 - np.asarray(utilization, dtype=float)
    recv = np.asarray(receivers, dtype=float)
    peak = recv.max(axis=1, keepdims=True)
    # receiver shares keep the argmax exactly invariant to rescaling counts
    share = np.divide(recv, peak, out=np.zeros_like(recv), where=peak > 0)
    weight = availability * share
    silent = weight.max(axis=1) <= 0
    if silent.any():
        weight[silent] = availability[silent]
    return np.argmax(weight, axis=1)


def select_channel_surf(observations: Sequence, neighbor_channels: Sequence[int]) -> int:
    """
    Pick the channel with the best availability-times-receivers weight.

    Args:
        observations: Per-channel utilization (floats or SpectrumObservation)
        neighbor_channels: Per-channel count of CR receivers

    Returns:
        Selected channel id

    Raises:
        InvalidArgumentError: No channels, or mismatched lengths / negative counts
    """
    util = _utilization_vector(observations)
    recv = np.asarray(neighbor_channels, dtype=int)
    if util.size == 0:
        raise InvalidArgumentError("cannot select from an empty channel set")
    if util.shape != recv.shape:
        raise InvalidArgumentError("utilization and receivers must cover the same channels")
    if (recv < 0).any():
        raise InvalidArgumentError("receiver counts must be >= 0")
    return int(surf_choice(util[None, :], recv[None, :])[0])


def select_channel_random(channels: Union[int, Sequence[int]], seed_stream: np.random.Generator) -> int:
    """
    Pick a channel uniformly at random, ignoring PR and CR activity.

    Args:
        channels: Channel count or explicit channel ids
        seed_stream: Seeded generator

    Returns:
        Selected channel id

    Raises:
        InvalidArgumentError: Empty channel set
    """
    ids = list(range(channels)) if isinstance(channels, int) else list(channels)
    if not ids:
        raise InvalidArgumentError("cannot select from an empty channel set")
    return int(ids[int(seed_stream.integers(len(ids)))])


class ChannelStrategy(ABC):
    """A channel-selection policy used for transmitting and overhearing."""

    name: str = ""

    @abstractmethod
    def select_many(self, utilization: np.ndarray, receivers: np.ndarray,
                    rng: np.random.Generator) -> np.ndarray:
        """Choose one channel per row of (n, C) inputs."""

    def select(self, utilization: Sequence[float], receivers: Sequence[int],
               rng: np.random.Generator) -> int:
        """Choose a channel for a single node."""
        util = np.asarray(utilization, dtype=float)
        if util.size == 0:
            raise InvalidArgumentError("cannot select from an empty channel set")
        recv = np.asarray(receivers, dtype=int)
        return int(self.select_many(util[None, :], recv[None, :], rng)[0])


class SurfStrategy(ChannelStrategy):
    """Availability-times-receivers selection."""

    name = "surf"

    def select_many(self, utilization, receivers, rng):
        return surf_choice(utilization, receivers)


class RandomStrategy(ChannelStrategy):
    """Uniform random selection (the RD baseline)."""

    name = "rd"

    def select_many(self, utilization, receivers, rng):
        n, channels = np.shape(utilization)
        return rng.integers(channels, size=n)


STRATEGIES: Dict[str, Type[ChannelStrategy]] = {
    SurfStrategy.name: SurfStrategy,
    RandomStrategy.name: RandomStrategy,
}


def get_strategy(name: str) -> ChannelStrategy:
    """Instantiate a strategy by its config name."""
    key = getattr(name, "value", name)
    try:
        return STRATEGIES[key]()
    except KeyError:
        raise ConfigError("strategy", f"unknown strategy {key!r}, expected one of {sorted(STRATEGIES)}") from None
