"""Badge definitions and soulbound badge tokens.

Definitions are the issuer-published metadata standard; tokens are unique,
non-transferable instances bound to one holder for life. All state here is a
deterministic fold over ledger events, so replaying the chain rebuilds the
registry exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Sequence

from .canon import canonical_hash, is_hash_hex
from .chain import Ledger
from .errors import (
    BadGrade,
    DuplicateAward,
    IllegalTransition,
    IssuerMismatch,
    SchemaViolation,
    UnknownDefinition,
    UnknownToken,
)
from .events import EventKind, LedgerEvent, make_event

NAME_MAX = 128
DESCRIPTION_MAX = 2048


class TokenStatus(str, Enum):
    PLATFORM_ISSUED = "PlatformIssued"
    CERTIFIED = "Certified"
    FROZEN = "Frozen"
    REVOKED = "Revoked"


#: (status, action) -> next status. Any pair absent here is illegal; Revoked
#: appears on no left-hand side because it is terminal.
TOKEN_TRANSITIONS: dict[tuple[TokenStatus, str], TokenStatus] = {
    (TokenStatus.PLATFORM_ISSUED, "certify"): TokenStatus.CERTIFIED,
    (TokenStatus.PLATFORM_ISSUED, "freeze"): TokenStatus.FROZEN,
    (TokenStatus.PLATFORM_ISSUED, "revoke"): TokenStatus.REVOKED,
    (TokenStatus.CERTIFIED, "freeze"): TokenStatus.FROZEN,
    (TokenStatus.CERTIFIED, "revoke"): TokenStatus.REVOKED,
    (TokenStatus.FROZEN, "restore"): TokenStatus.CERTIFIED,
    (TokenStatus.FROZEN, "revoke"): TokenStatus.REVOKED,
}

TOKEN_ACTIONS = ("certify", "freeze", "restore", "revoke")


@dataclass(frozen=True)
class BadgeDefinition:
    definition_id: str
    name: str
    icon: str  # content hash of the off-ledger image
    description: str
    criteria: str
    grade_levels: tuple[str, ...]
    issuer: str
    created_at: int

    def to_wire(self) -> dict:
        return {
            "created_at": self.created_at,
            "criteria": self.criteria,
            "definition_id": self.definition_id,
            "description": self.description,
            "grade_levels": list(self.grade_levels),
            "icon": self.icon,
            "issuer": self.issuer,
            "name": self.name,
        }


@dataclass(frozen=True)
class BadgeToken:
    token_id: str
    definition_id: str
    holder: str
    grade: str
    issuer: str
    status: TokenStatus
    minted_at: int
    certified_at: int = 0  # 0 = never certified
    official_description: str = ""

    @property
    def live(self) -> bool:
        return self.status is not TokenStatus.REVOKED

    def to_wire(self) -> dict:
        return {
            "certified_at": self.certified_at,
            "definition_id": self.definition_id,
            "grade": self.grade,
            "holder": self.holder,
            "issuer": self.issuer,
            "minted_at": self.minted_at,
            "official_description": self.official_description,
            "status": self.status.value,
            "token_id": self.token_id,
        }


def definition_content_id(
    name: str,
    icon: str,
    description: str,
    criteria: str,
    grade_levels: Sequence[str],
    issuer: str,
) -> str:
    """Content address of a definition; created_at deliberately excluded so
    re-registering identical metadata lands on the same id."""
    return canonical_hash(
        {
            "criteria": criteria,
            "description": description,
            "grade_levels": list(grade_levels),
            "icon": icon,
            "issuer": issuer,
            "name": name,
        }
    )


def token_content_id(definition_id: str, holder: str, minted_at: int, issuer: str) -> str:
    return canonical_hash([definition_id, holder, minted_at, issuer])


def _validate_metadata(
    name: str,
    icon: str,
    description: str,
    criteria: str,
    grade_levels: Sequence[str],
    issuer: str,
) -> None:
    if not isinstance(name, str) or not 1 <= len(name) <= NAME_MAX:
        raise SchemaViolation(f"name must be 1..{NAME_MAX} characters")
    if not is_hash_hex(icon):
        raise SchemaViolation("icon must be the 32-byte content hash of the image, hex-encoded")
    if not isinstance(description, str) or len(description) > DESCRIPTION_MAX:
        raise SchemaViolation(f"description must be at most {DESCRIPTION_MAX} characters")
    if not isinstance(criteria, str) or not criteria:
        raise SchemaViolation("criteria text must be non-empty")
    if (
        not isinstance(grade_levels, (list, tuple))
        or not grade_levels
        or not all(isinstance(g, str) and g for g in grade_levels)
    ):
        raise SchemaViolation("grade_levels must be a non-empty list of non-empty names")
    if len(set(grade_levels)) != len(grade_levels):
        raise SchemaViolation("grade_levels must be duplicate-free")
    if not isinstance(issuer, str) or not issuer:
        raise SchemaViolation("issuer must be non-empty")


class BadgeRegistry:
    """Chain-derived index of definitions and tokens, plus the mint/status ops.

    Mutations append events and then rely on the on_commit fold to update the
    indexes — the same code path replay uses, so live state and restored state
    cannot drift.
    """

    def __init__(self, ledger: Ledger):
        self.ledger = ledger
        self.definitions: dict[str, BadgeDefinition] = {}
        self.tokens: dict[str, BadgeToken] = {}
        self._live: dict[tuple[str, str, str], str] = {}
        self._holder_tokens: dict[str, list[str]] = {}
        self._definition_tokens: dict[str, list[str]] = {}
        self._last_minted_at = 0
        ledger.on_commit.append(self.fold_block)

    # -- fold (shared by live commits and replay) ----------------------------

    def fold_block(self, block) -> None:
        for event in block.events:
            self.fold_event(event)

    def fold_event(self, event: LedgerEvent) -> None:
        kind, p = event.kind, event.payload
        if kind is EventKind.DEFINITION_REGISTERED:
            self.definitions[p["definition_id"]] = BadgeDefinition(
                definition_id=p["definition_id"],
                name=p["name"],
                icon=p["icon"],
                description=p["description"],
                criteria=p["criteria"],
                grade_levels=tuple(p["grade_levels"]),
                issuer=p["issuer"],
                created_at=p["created_at"],
            )
        elif kind is EventKind.TOKEN_MINTED:
            token = BadgeToken(
                token_id=p["token_id"],
                definition_id=p["definition_id"],
                holder=p["holder"],
                grade=p["grade"],
                issuer=p["issuer"],
                status=TokenStatus.PLATFORM_ISSUED,
                minted_at=p["minted_at"],
            )
            self.tokens[token.token_id] = token
            self._live[(token.definition_id, token.holder, token.grade)] = token.token_id
            self._holder_tokens.setdefault(token.holder, []).append(token.token_id)
            self._definition_tokens.setdefault(token.definition_id, []).append(token.token_id)
            self._last_minted_at = max(self._last_minted_at, token.minted_at)
        elif kind is EventKind.TOKEN_CERTIFIED:
            token = self.tokens[p["token_id"]]
            self.tokens[token.token_id] = replace(
                token,
                status=TokenStatus.CERTIFIED,
                certified_at=p["certified_at"],
                official_description=p["official_description"],
            )
        elif kind is EventKind.TOKEN_FROZEN:
            token = self.tokens[p["token_id"]]
            self.tokens[token.token_id] = replace(token, status=TokenStatus.FROZEN)
        elif kind is EventKind.TOKEN_REVOKED:
            token = self.tokens[p["token_id"]]
            self.tokens[token.token_id] = replace(token, status=TokenStatus.REVOKED)
            self._live.pop((token.definition_id, token.holder, token.grade), None)

    # -- reads ---------------------------------------------------------------

    def get_definition(self, definition_id: str) -> BadgeDefinition:
        definition = self.definitions.get(definition_id)
        if definition is None:
            raise UnknownDefinition(f"no definition {definition_id}")
        return definition

    def get_token(self, token_id: str) -> BadgeToken:
        token = self.tokens.get(token_id)
        if token is None:
            raise UnknownToken(f"no token {token_id}")
        return token

    def tokens_of_holder(self, holder: str) -> list[BadgeToken]:
        return [self.tokens[t] for t in self._holder_tokens.get(holder, [])]

    def tokens_of_definition(self, definition_id: str) -> list[BadgeToken]:
        return [self.tokens[t] for t in self._definition_tokens.get(definition_id, [])]

    def live_token(self, definition_id: str, holder: str, grade: str) -> Optional[BadgeToken]:
        token_id = self._live.get((definition_id, holder, grade))
        return self.tokens[token_id] if token_id else None

    def verify_token(self, token_id: str) -> dict:
        """Self-contained verification report: status plus the token's full
        on-chain history, each event carrying its inclusion proof."""
        token = self.tokens.get(token_id)
        if token is None:
            return {"certified": False, "exists": False, "token_id": token_id}
        hits = self.ledger.trace(token_id)
        proofs = []
        for hit in hits:
            entry = hit.to_wire()
            entry["verified"] = hit.verify()
            proofs.append(entry)
        return {
            "certified": token.status is TokenStatus.CERTIFIED,
            "definition": self.definitions[token.definition_id].to_wire(),
            "exists": True,
            "holder": token.holder,
            "inclusion_proofs": proofs,
            "issuer": token.issuer,
            "proofs_ok": all(p["verified"] for p in proofs),
            "status": token.status.value,
            "token": token.to_wire(),
            "token_id": token_id,
        }

    def snapshot(self) -> dict:
        return {
            "definitions": {d: v.to_wire() for d, v in self.definitions.items()},
            "tokens": {t: v.to_wire() for t, v in self.tokens.items()},
        }

    # -- writes ----------------------------------------------------------------

    def register_definition(
        self,
        *,
        name: str,
        icon: str,
        description: str,
        criteria: str,
        grade_levels: Sequence[str],
        issuer: str,
        author: Optional[str] = None,
    ) -> BadgeDefinition:
        _validate_metadata(name, icon, description, criteria, grade_levels, issuer)
        definition_id = definition_content_id(name, icon, description, criteria, grade_levels, issuer)
        existing = self.definitions.get(definition_id)
        if existing is not None:
            return existing  # identical metadata: same id, no second event
        created_at = self.ledger.now()
        payload = {
            "created_at": created_at,
            "criteria": criteria,
            "definition_id": definition_id,
            "description": description,
            "grade_levels": list(grade_levels),
            "icon": icon,
            "issuer": issuer,
            "name": name,
        }
        event = make_event(EventKind.DEFINITION_REGISTERED, payload, author or issuer, created_at)
        self.ledger.commit([event])
        return self.definitions[definition_id]

    def mint_token(
        self,
        definition_id: str,
        holder: str,
        grade: str,
        issuer: str,
        author: Optional[str] = None,
    ) -> BadgeToken:
        definition = self.get_definition(definition_id)
        if not isinstance(holder, str) or not holder:
            raise SchemaViolation("holder must be non-empty")
        if grade not in definition.grade_levels:
            raise BadGrade(f"grade {grade!r} not in definition's grade levels")
        if issuer != definition.issuer:
            raise IssuerMismatch(f"definition belongs to {definition.issuer}, not {issuer}")
        if (definition_id, holder, grade) in self._live:
            raise DuplicateAward(f"live award already exists for {holder} at grade {grade}")
        # Strictly monotone mint times keep the content-derived token id
        # unique even for same-second mints.
        minted_at = max(self.ledger.now(), self._last_minted_at + 1)
        token_id = token_content_id(definition_id, holder, minted_at, issuer)
        payload = {
            "definition_id": definition_id,
            "grade": grade,
            "holder": holder,
            "issuer": issuer,
            "minted_at": minted_at,
            "token_id": token_id,
        }
        event = make_event(EventKind.TOKEN_MINTED, payload, author or issuer, minted_at)
        self.ledger.commit([event])
        return self.tokens[token_id]

    def freeze_token(self, token_id: str, author: str) -> BadgeToken:
        return self._transition(token_id, "freeze", author)

    def revoke_token(self, token_id: str, author: str) -> BadgeToken:
        return self._transition(token_id, "revoke", author)

    def restore_token(self, token_id: str, author: str) -> BadgeToken:
        return self._transition(token_id, "restore", author)

    def certification_event(
        self, token_id: str, official_description: str, certified_at: int, author: str
    ) -> LedgerEvent:
        """Build (not commit) the upgrade event for one platform token; the
        certification workflow batches these into a single block."""
        token = self.get_token(token_id)
        if (token.status, "certify") not in TOKEN_TRANSITIONS:
            raise IllegalTransition(f"cannot certify a token in status {token.status.value}")
        payload = {
            "certified_at": certified_at,
            "definition_id": token.definition_id,
            "holder": token.holder,
            "official_description": official_description,
            "restored": False,
            "token_id": token_id,
        }
        return make_event(EventKind.TOKEN_CERTIFIED, payload, author, certified_at)

    def _transition(self, token_id: str, action: str, author: str) -> BadgeToken:
        token = self.get_token(token_id)
        target = TOKEN_TRANSITIONS.get((token.status, action))
        if target is None:
            raise IllegalTransition(f"{action} is illegal from status {token.status.value}")
        if action == "restore" and token.certified_at == 0:
            # A frozen platform-level token was never approved by the
            # authority; waking it up as Certified would mint official status
            # out of thin air.
            raise IllegalTransition("restore requires a previously certified token")
        now = self.ledger.now()
        if action == "freeze":
            kind = EventKind.TOKEN_FROZEN
            payload = {
                "definition_id": token.definition_id,
                "holder": token.holder,
                "token_id": token_id,
            }
        elif action == "revoke":
            kind = EventKind.TOKEN_REVOKED
            payload = {
                "definition_id": token.definition_id,
                "holder": token.holder,
                "token_id": token_id,
            }
        else:  # restore
            kind = EventKind.TOKEN_CERTIFIED
            payload = {
                "certified_at": token.certified_at,
                "definition_id": token.definition_id,
                "holder": token.holder,
                "official_description": token.official_description,
                "restored": True,
                "token_id": token_id,
            }
        self.ledger.commit([make_event(kind, payload, author, now)])
        return self.tokens[token_id]
