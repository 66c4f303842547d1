"""Append-only record log for durable node state.

Layout: a sequence of records, each a 4-byte big-endian length prefix followed
by that many bytes of canonical JSON. Every record envelope carries its own
content hash, so any bit flip — in a prefix, a key, a body, or the hash
itself — surfaces as `CorruptLog` (with the byte offset of the damaged
record) instead of silently altering replayed state.

The first record is always `("version", {"format": 1})`. A log written by an
incompatible build fails fast with `IncompatibleVersion` rather than being
misinterpreted.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable

from .canon import canonical_decode, canonical_encode, canonical_hash
from .errors import CorruptLog, IncompatibleVersion, NonCanonical, SchemaViolation

FORMAT_VERSION = 1
VERSION_KIND = "version"
MAX_RECORD_BYTES = 64 * 1024 * 1024  # bounds trust in a length prefix
_PREFIX = struct.Struct(">I")
_ENVELOPE_KEYS = {"body", "hash", "kind"}


@dataclass(frozen=True)
class LogRecord:
    kind: str
    body: Any
    offset: int


def encode_record(kind: str, body: Any) -> bytes:
    if not isinstance(kind, str) or not kind:
        raise SchemaViolation("record kind must be a non-empty string")
    # The hash binds kind and body together: a flipped byte anywhere in the
    # envelope, not just inside the body, must fail the check.
    payload = canonical_encode({"body": body, "hash": canonical_hash([kind, body]), "kind": kind})
    if len(payload) > MAX_RECORD_BYTES:
        raise SchemaViolation(f"record of {len(payload)} bytes exceeds the log bound")
    return _PREFIX.pack(len(payload)) + payload


def _decode_payload(payload: bytes, offset: int) -> tuple[str, Any]:
    try:
        envelope = canonical_decode(payload)
    except NonCanonical as exc:
        raise CorruptLog(f"undecodable record: {exc}", offset=offset)
    if not isinstance(envelope, dict) or set(envelope) != _ENVELOPE_KEYS:
        raise CorruptLog("record envelope has the wrong shape", offset=offset)
    kind, body = envelope["kind"], envelope["body"]
    if not isinstance(kind, str):
        raise CorruptLog("record kind is not a string", offset=offset)
    if envelope["hash"] != canonical_hash([kind, body]):
        raise CorruptLog("record hash does not match its content", offset=offset)
    return kind, body


def parse_log(data: bytes) -> list[LogRecord]:
    """Walk raw log bytes into records, or raise at the first damaged one."""
    records: list[LogRecord] = []
    offset = 0
    while offset < len(data):
        if len(data) - offset < _PREFIX.size:
            raise CorruptLog("truncated length prefix at end of log", offset=offset)
        (length,) = _PREFIX.unpack_from(data, offset)
        if length == 0:
            raise CorruptLog("zero-length record", offset=offset)
        if length > MAX_RECORD_BYTES:
            raise CorruptLog(f"implausible record length {length}", offset=offset)
        start = offset + _PREFIX.size
        if start + length > len(data):
            raise CorruptLog("record extends past end of log", offset=offset)
        kind, body = _decode_payload(data[start : start + length], offset)
        records.append(LogRecord(kind=kind, body=body, offset=offset))
        offset = start + length
    return records


def _check_version(records: list[LogRecord]) -> None:
    if not records or records[0].kind != VERSION_KIND:
        raise IncompatibleVersion("log does not begin with a version record")
    header = records[0].body
    if header != {"format": FORMAT_VERSION}:
        raise IncompatibleVersion(f"log format {header!r} is not supported")


class AppendLog:
    """A file-backed append-only log with a version header."""

    def __init__(self, path: Path | str):
        self.path = Path(path)

    @classmethod
    def create(cls, path: Path | str) -> "AppendLog":
        log = cls(path)
        log.path.parent.mkdir(parents=True, exist_ok=True)
        with open(log.path, "xb") as handle:
            handle.write(encode_record(VERSION_KIND, {"format": FORMAT_VERSION}))
            handle.flush()
            os.fsync(handle.fileno())
        return log

    def append(self, kind: str, body: Any) -> int:
        """Durably append one record; returns its byte offset."""
        if not self.path.exists():
            raise FileNotFoundError(f"no log at {self.path}")
        with open(self.path, "ab") as handle:
            offset = handle.tell()
            handle.write(encode_record(kind, body))
            handle.flush()
            os.fsync(handle.fileno())
        return offset

    def append_many(self, items: Iterable[tuple[str, Any]]) -> None:
        if not self.path.exists():
            raise FileNotFoundError(f"no log at {self.path}")
        with open(self.path, "ab") as handle:
            for kind, body in items:
                handle.write(encode_record(kind, body))
            handle.flush()
            os.fsync(handle.fileno())

    def replay(self) -> list[LogRecord]:
        """All records after the validated version header, in write order."""
        records = parse_log(self.path.read_bytes())
        _check_version(records)
        return records[1:]
