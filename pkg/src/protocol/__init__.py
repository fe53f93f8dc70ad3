"""Per-slot node behaviors: discovery, pickup, dissemination, polling and relaying."""

from .cmr import (
    Backbone,
    CmrPoller,
    Grant,
    RelayAction,
    associate_crs,
    backbone_route,
    build_pollers,
    cmr_poll,
    cmr_relay,
)
from .discovery import (
    InfrastructureRegistry,
    PrDataSource,
    RegistryEntry,
    discover_infrastructure,
    has_pickup_work,
    pickup_pr_data,
)
from .dissemination import Disseminator
from .medium import Reception, SlotOutcome, resolve_receptions
from .messages import Carriage, Hop, Message, TerminalState, Transmission

__all__ = [
    "Backbone",
    "Carriage",
    "CmrPoller",
    "Disseminator",
    "Grant",
    "Hop",
    "InfrastructureRegistry",
    "Message",
    "PrDataSource",
    "Reception",
    "RegistryEntry",
    "RelayAction",
    "SlotOutcome",
    "TerminalState",
    "Transmission",
    "associate_crs",
    "backbone_route",
    "build_pollers",
    "cmr_poll",
    "cmr_relay",
    "discover_infrastructure",
    "has_pickup_work",
    "pickup_pr_data",
    "resolve_receptions",
]
