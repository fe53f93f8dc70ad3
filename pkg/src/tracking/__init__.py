"""Event logs and their replay verification."""

from .event_log import Event, EventKind, EventLog
from .replay import ReplayReport, Violation, replay, replay_files

__all__ = ["Event", "EventKind", "EventLog", "ReplayReport", "Violation", "replay", "replay_files"]
