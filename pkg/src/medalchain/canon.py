"""Canonical serialization for content hashing.

Everything the ledger hashes goes through `canonical_encode`, so the byte
form must be fully determined by the logical value:

- compact JSON, UTF-8, no insignificant whitespace
- map keys sorted in ascending UTF-8 byte order (equals code-point order)
- integers in shortest decimal form; booleans as `true`/`false`
- byte strings encoded as lowercase hex JSON strings
- floats, None, and any other value kind are rejected outright — fractional
  quantities must be carried as integer pairs

`canonical_decode` is strict: the input must re-encode to the identical
bytes, so duplicate keys, reordered keys, uppercase hex escapes, leading
zeros and similar near-misses are all rejected.
"""

from __future__ import annotations

import hashlib
import json
from typing import Any

from .errors import NonCanonical, UnsupportedValue


def _normalize(value: Any) -> Any:
    if isinstance(value, bool):
        return value
    if isinstance(value, int):
        return int(value)
    if isinstance(value, str):
        return str(value)
    if isinstance(value, (bytes, bytearray)):
        return bytes(value).hex()
    if isinstance(value, (list, tuple)):
        return [_normalize(v) for v in value]
    if isinstance(value, dict):
        out = {}
        for key, val in value.items():
            if not isinstance(key, str) or isinstance(key, bool):
                raise UnsupportedValue(f"map key must be a string, got {key!r}")
            out[str(key)] = _normalize(val)
        return out
    if isinstance(value, float):
        raise UnsupportedValue("floats are banned from hashed content")
    raise UnsupportedValue(f"unsupported value kind: {type(value).__name__}")


def canonical_encode(record: Any) -> bytes:
    """Serialize `record` to its unique canonical byte form."""
    normalized = _normalize(record)
    try:
        text = json.dumps(
            normalized,
            sort_keys=True,
            separators=(",", ":"),
            ensure_ascii=False,
            allow_nan=False,
        )
        return text.encode("utf-8")
    except (ValueError, UnicodeEncodeError) as exc:
        raise UnsupportedValue(str(exc)) from exc


def _reject_float(_: str) -> Any:
    raise NonCanonical("floats never appear in canonical form")


def canonical_decode(data: bytes) -> Any:
    """Parse canonical bytes back to a value, rejecting non-canonical input."""
    try:
        obj = json.loads(
            data.decode("utf-8"),
            parse_float=_reject_float,
            parse_constant=_reject_float,
        )
    except NonCanonical:
        raise
    except (ValueError, UnicodeDecodeError) as exc:
        raise NonCanonical(f"undecodable canonical input: {exc}") from exc
    if obj is None:
        raise NonCanonical("null is not a canonical value")
    # Round-trip strictness: bit-exactness of the encoding is normative.
    # Any value the encoder refuses (nested null included) is equally
    # impossible in well-formed input, so it surfaces as NonCanonical here.
    try:
        reencoded = canonical_encode(obj)
    except UnsupportedValue as exc:
        raise NonCanonical(str(exc)) from exc
    if reencoded != data:
        raise NonCanonical("input bytes are not in canonical form")
    return obj


def sha256(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def canonical_hash(record: Any) -> str:
    """Lowercase hex SHA-256 of the canonical encoding of `record`."""
    return sha256_hex(canonical_encode(record))


def is_hash_hex(value: Any) -> bool:
    """True iff `value` is a lowercase hex string of a 32-byte hash."""
    return (
        isinstance(value, str)
        and len(value) == 64
        and all(c in "0123456789abcdef" for c in value)
    )
