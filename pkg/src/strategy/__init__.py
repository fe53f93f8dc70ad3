"""Channel-selection strategies and CMR spectrum opportunity maps."""

from .opportunity import (
    ChannelRecord,
    OpportunityMap,
    cmr_assign_channels,
    eligible_channels,
    fluctuation_monitor_update,
)
from .selection import (
    STRATEGIES,
    ChannelStrategy,
    ChannelWeight,
    RandomStrategy,
    SurfStrategy,
    channel_weights,
    get_strategy,
    select_channel_random,
    select_channel_surf,
    surf_choice,
)

__all__ = [
    "STRATEGIES",
    "ChannelRecord",
    "ChannelStrategy",
    "ChannelWeight",
    "OpportunityMap",
    "RandomStrategy",
    "SurfStrategy",
    "channel_weights",
    "cmr_assign_channels",
    "eligible_channels",
    "fluctuation_monitor_update",
    "get_strategy",
    "select_channel_random",
    "select_channel_surf",
    "surf_choice",
]
