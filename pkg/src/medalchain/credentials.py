"""Actor credentials and request signatures.

Three roles share one keyed identity scheme: the single central Authority,
any number of Platforms, and Users. A mutation request is authenticated by
an RSA signature over a domain-tagged digest of ``method\\npath\\nbody`` so a
captured signature cannot be replayed against a different endpoint.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .canon import sha256
from .errors import SchemaViolation, Unauthorized, UnknownActor
from .rsa import RsaKeyPair, RsaPublicKey

REQUEST_TAG = b"request"


class Role(str, Enum):
    AUTHORITY = "Authority"
    PLATFORM = "Platform"
    USER = "User"


@dataclass(frozen=True)
class Credential:
    actor_id: str
    role: Role
    public_key: RsaPublicKey
    issued_at: int

    def to_wire(self) -> dict:
        return {
            "actor_id": self.actor_id,
            "issued_at": self.issued_at,
            "public_key": self.public_key.to_wire(),
            "role": self.role.value,
        }

    @classmethod
    def from_wire(cls, wire: dict) -> "Credential":
        if not isinstance(wire, dict) or set(wire) != {
            "actor_id",
            "issued_at",
            "public_key",
            "role",
        }:
            raise SchemaViolation("credential wire form has the wrong shape")
        try:
            role = Role(wire["role"])
        except ValueError:
            raise SchemaViolation(f"unknown role {wire['role']!r}")
        actor_id, issued_at = wire["actor_id"], wire["issued_at"]
        if not isinstance(actor_id, str) or not actor_id:
            raise SchemaViolation("actor_id must be a non-empty string")
        if not isinstance(issued_at, int) or isinstance(issued_at, bool) or issued_at < 0:
            raise SchemaViolation("issued_at must be a non-negative integer")
        return cls(
            actor_id=actor_id,
            role=role,
            public_key=RsaPublicKey.from_wire(wire["public_key"]),
            issued_at=issued_at,
        )


def signing_payload(method: str, path: str, body: bytes) -> bytes:
    return method.upper().encode() + b"\n" + path.encode() + b"\n" + body


def request_digest(method: str, path: str, body: bytes, modulus: int) -> int:
    digest = sha256(REQUEST_TAG + signing_payload(method, path, body))
    return int.from_bytes(digest, "big") % modulus or 1


def sign_request(key: RsaKeyPair, method: str, path: str, body: bytes) -> str:
    """Hex signature for a mutation request, as sent in the signature header."""
    value = pow(request_digest(method, path, body, key.n), key.d, key.n)
    return format(value, "x")


def verify_request(
    public_key: RsaPublicKey, method: str, path: str, body: bytes, signature_hex: str
) -> bool:
    try:
        signature = int(signature_hex, 16)
    except (TypeError, ValueError):
        return False
    if not 0 <= signature < public_key.n:
        return False
    expected = request_digest(method, path, body, public_key.n)
    return pow(signature, public_key.e, public_key.n) == expected


class CredentialStore:
    """All enrolled actors; holds exactly one Authority credential."""

    def __init__(self):
        self._by_actor: dict[str, Credential] = {}
        self._authority_id: Optional[str] = None

    def __len__(self) -> int:
        return len(self._by_actor)

    def __contains__(self, actor_id: str) -> bool:
        return actor_id in self._by_actor

    def add(self, credential: Credential) -> None:
        if credential.actor_id in self._by_actor:
            raise SchemaViolation(f"actor {credential.actor_id!r} is already enrolled")
        if credential.role is Role.AUTHORITY:
            if self._authority_id is not None:
                raise SchemaViolation("a network has exactly one authority credential")
            self._authority_id = credential.actor_id
        self._by_actor[credential.actor_id] = credential

    def get(self, actor_id: str) -> Credential:
        credential = self._by_actor.get(actor_id)
        if credential is None:
            raise UnknownActor(f"no credential enrolled for {actor_id!r}")
        return credential

    @property
    def authority(self) -> Credential:
        if self._authority_id is None:
            raise UnknownActor("no authority credential enrolled")
        return self._by_actor[self._authority_id]

    def actors(self) -> list[Credential]:
        return [self._by_actor[k] for k in sorted(self._by_actor)]

    def require_role(self, actor_id: str, *roles: Role) -> Credential:
        credential = self.get(actor_id)
        if credential.role not in roles:
            allowed = ", ".join(r.value for r in roles)
            raise Unauthorized(
                f"{actor_id!r} holds the {credential.role.value} role; needs one of: {allowed}"
            )
        return credential

    def authenticate(
        self, actor_id: str, method: str, path: str, body: bytes, signature_hex: str
    ) -> Credential:
        credential = self.get(actor_id)
        if not verify_request(credential.public_key, method, path, body, signature_hex):
            raise Unauthorized("request signature does not verify")
        return credential


def new_credential(
    actor_id: str, role: Role, key: RsaKeyPair, issued_at: int
) -> Credential:
    if not actor_id or not isinstance(actor_id, str):
        raise SchemaViolation("actor_id must be a non-empty string")
    return Credential(
        actor_id=actor_id, role=role, public_key=key.public, issued_at=issued_at
    )


__all__ = [
    "Credential",
    "CredentialStore",
    "Role",
    "new_credential",
    "request_digest",
    "sign_request",
    "signing_payload",
    "verify_request",
]
