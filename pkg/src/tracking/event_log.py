"""Event log of a simulation run, for post-hoc analysis and replay."""

import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Union

from ..utils.errors import LogParseError
from ..utils.files import atomic_write_text

logger = logging.getLogger(__name__)

EMPTY = "-"


class EventKind(str, Enum):
    """Kinds of logged events."""
    DISCOVER = "DISCOVER"          # CR heard a PR beacon
    PICKUP = "PICKUP"              # CR received a PR data unit
    PICKUP_FAIL = "PICKUP_FAIL"    # PR data lost to a co-channel PR
    INJECT = "INJECT"              # message enters the CR network
    TX = "TX"
    RX = "RX"                      # CR reception
    CMR_RX = "CMR_RX"
    COLLISION = "COLLISION"
    BLOCKED = "BLOCKED"            # reception lost to PR activity
    GRANT = "GRANT"                # polling grant
    FEEDBACK = "FEEDBACK"          # CR report to its CMR
    RELAY = "RELAY"                # one backbone hop
    PORTAL = "PORTAL"
    TERMINAL = "TERMINAL"


@dataclass(frozen=True)
class Event:
    """One log line: ``slot kind node channel msg ttl peer note``."""
    slot: int
    kind: EventKind
    node: int
    channel: Optional[int] = None
    msg: Optional[int] = None
    ttl: Optional[int] = None
    peer: Optional[int] = None
    note: str = ""

    def to_line(self) -> str:
        fields = [self.slot, self.kind.value, self.node, self.channel, self.msg, self.ttl, self.peer]
        text = [EMPTY if v is None else str(v) for v in fields]
        text.append(self.note or EMPTY)
        return "\t".join(text)

    @classmethod
    def from_line(cls, line: str, line_number: int, path: Optional[str] = None) -> "Event":
        """
        Parse one tab-separated line.

        Raises:
            LogParseError: Wrong field count, unknown kind or non-integer field
        """
        parts = line.rstrip("\n").split("\t")
        if len(parts) != 8:
            raise LogParseError(line_number, f"expected 8 fields, got {len(parts)}", path)
        try:
            kind = EventKind(parts[1])
        except ValueError:
            raise LogParseError(line_number, f"unknown event kind {parts[1]!r}", path) from None

        def number(text: str, name: str, required: bool = False) -> Optional[int]:
            if text == EMPTY and not required:
                return None
            try:
                return int(text)
            except ValueError:
                raise LogParseError(line_number, f"{name} must be an integer, got {text!r}", path) from None

        return cls(
            slot=number(parts[0], "slot", required=True),
            kind=kind,
            node=number(parts[2], "node", required=True),
            channel=number(parts[3], "channel"),
            msg=number(parts[4], "msg"),
            ttl=number(parts[5], "ttl"),
            peer=number(parts[6], "peer"),
            note="" if parts[7] == EMPTY else parts[7],
        )


class EventLog:
    """Append-only event record of one replication."""

    def __init__(self):
        self.events: List[Event] = []
        self.header: Dict[str, str] = {}
        self.line_numbers: List[int] = []  # source lines of loaded events

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self) -> Iterator[Event]:
        return iter(self.events)

    def record(self, slot: int, kind: EventKind, node: int, channel: Optional[int] = None,
               msg: Optional[int] = None, ttl: Optional[int] = None, peer: Optional[int] = None,
               note: str = "") -> None:
        """Append an event."""
        self.events.append(Event(slot, kind, node, channel, msg, ttl, peer, note))

    def line_of(self, index: int) -> int:
        """File line of the index-th event (the header is line 1)."""
        if index < len(self.line_numbers):
            return self.line_numbers[index]
        return index + 2

    def of_kind(self, *kinds: EventKind) -> List[Event]:
        return [e for e in self.events if e.kind in kinds]

    def dumps(self) -> str:
        """Serialize with the ``#`` header line first."""
        header = " ".join(f"{k}={v}" for k, v in self.header.items())
        lines = [f"# {header}".rstrip()]
        lines.extend(e.to_line() for e in self.events)
        return "\n".join(lines) + "\n"

    def save(self, path: Union[str, Path]) -> None:
        """Write the log atomically."""
        atomic_write_text(path, self.dumps())
        logger.info(f"Wrote {len(self.events)} events to {path}")

    @classmethod
    def loads(cls, text: str, path: Optional[str] = None) -> "EventLog":
        """
        Parse a serialized log.

        Raises:
            LogParseError: Malformed line, with its 1-based line number
        """
        log = cls()
        for number, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            if line.startswith("#"):
                for pair in line[1:].split():
                    key, sep, value = pair.partition("=")
                    if not sep:
                        raise LogParseError(number, f"header entry {pair!r} is not key=value", path)
                    log.header[key] = value
                continue
            log.events.append(Event.from_line(line, number, path))
            log.line_numbers.append(number)
        return log

    @classmethod
    def load(cls, path: Union[str, Path]) -> "EventLog":
        text = Path(path).read_text(encoding="utf-8")
        return cls.loads(text, str(path))
