"""Ledger events: the unit of record every subsystem writes to the chain."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Any, Mapping

from .canon import canonical_encode, is_hash_hex, sha256_hex
from .errors import SchemaViolation


class EventKind(str, Enum):
    DEFINITION_REGISTERED = "DefinitionRegistered"
    TOKEN_MINTED = "TokenMinted"
    TOKEN_CERTIFIED = "TokenCertified"
    TOKEN_FROZEN = "TokenFrozen"
    TOKEN_REVOKED = "TokenRevoked"
    RULE_UPDATED = "RuleUpdated"
    VOTE_ROUND_OPENED = "VoteRoundOpened"
    VOTE_CAST = "VoteCast"
    VOTE_ROUND_CLOSED = "VoteRoundClosed"
    APPLICATION_DECISION = "ApplicationDecision"
    RECORD_LINKED = "RecordLinked"


_KIND_VALUES = {k.value for k in EventKind}

_EVENT_WIRE_KEYS = {"author", "event_id", "kind", "payload", "timestamp"}


def event_content_id(kind: str, payload: Mapping, author: str, timestamp: int) -> str:
    """Event id: SHA-256 over the canonical encoding of the content tuple."""
    return sha256_hex(canonical_encode([kind, dict(payload), author, timestamp]))


@dataclass(frozen=True)
class LedgerEvent:
    """Immutable once constructed; payload must stay in the canonical value domain."""

    kind: EventKind
    payload: Mapping[str, Any]
    author: str
    timestamp: int
    event_id: str

    def to_wire(self) -> dict:
        return {
            "author": self.author,
            "event_id": self.event_id,
            "kind": self.kind.value,
            "payload": dict(self.payload),
            "timestamp": self.timestamp,
        }


def make_event(
    kind: EventKind | str,
    payload: Mapping[str, Any],
    author: str,
    timestamp: int,
) -> LedgerEvent:
    kind = EventKind(kind)
    if not isinstance(timestamp, int) or isinstance(timestamp, bool) or timestamp < 0:
        raise SchemaViolation("event timestamp must be a non-negative integer")
    event_id = event_content_id(kind.value, payload, author, timestamp)
    return LedgerEvent(
        kind=kind,
        payload=dict(payload),
        author=author,
        timestamp=timestamp,
        event_id=event_id,
    )


def recompute_event_id(event: LedgerEvent) -> str:
    return event_content_id(event.kind.value, event.payload, event.author, event.timestamp)


def event_from_wire(wire: Mapping[str, Any]) -> LedgerEvent:
    """Strict decode: exact key set, valid kind, lowercase hex id.

    The id is NOT checked against the content here; chain validation does
    that so tampering is reported at the right height.
    """
    if not isinstance(wire, Mapping) or set(wire.keys()) != _EVENT_WIRE_KEYS:
        raise SchemaViolation("event wire form must have exactly the event keys")
    kind = wire["kind"]
    if kind not in _KIND_VALUES:
        raise SchemaViolation(f"unknown event kind: {kind!r}")
    event_id = wire["event_id"]
    if not is_hash_hex(event_id):
        raise SchemaViolation("event_id must be 64 lowercase hex chars")
    author = wire["author"]
    if not isinstance(author, str):
        raise SchemaViolation("author must be a string")
    timestamp = wire["timestamp"]
    if not isinstance(timestamp, int) or isinstance(timestamp, bool) or timestamp < 0:
        raise SchemaViolation("timestamp must be a non-negative integer")
    payload = wire["payload"]
    if not isinstance(payload, Mapping):
        raise SchemaViolation("payload must be a map")
    return LedgerEvent(
        kind=EventKind(kind),
        payload=dict(payload),
        author=author,
        timestamp=timestamp,
        event_id=event_id,
    )


def payload_references(payload: Any, subject: str) -> bool:
    """True iff `subject` appears as a value anywhere inside `payload`."""
    if isinstance(payload, str):
        return payload == subject
    if isinstance(payload, Mapping):
        return any(payload_references(v, subject) for v in payload.values())
    if isinstance(payload, (list, tuple)):
        return any(payload_references(v, subject) for v in payload)
    return False
