"""Declarative issuance rules evaluated over off-chain activity logs.

A rule contract is a conjunction of counted-action atoms, each optionally
scoped to a sliding time window. Evaluation is a pure function; only the
resulting mint (and governance-approved rule changes) reach the ledger.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

from .canon import canonical_hash
from .chain import Block, Ledger
from .errors import (
    InactiveContract,
    IssuerMismatch,
    NotEligible,
    SchemaViolation,
    StaleVersion,
    UnknownContract,
    VoteNotPassing,
    VoteSubjectMismatch,
)
from .events import EventKind, make_event
from .registry import BadgeRegistry, BadgeToken
from .voting import TallyResult


@dataclass(frozen=True)
class Condition:
    action: str
    min_count: int
    window_seconds: Optional[int] = None  # None = the whole history

    def to_wire(self) -> dict:
        wire: dict = {"action": self.action, "min_count": self.min_count}
        if self.window_seconds is not None:
            wire["window_seconds"] = self.window_seconds
        return wire


@dataclass(frozen=True)
class ActivityEvent:
    user: str
    action: str
    platform: str
    occurred_at: int
    attributes: dict

    def to_wire(self) -> dict:
        return {
            "action": self.action,
            "attributes": dict(self.attributes),
            "occurred_at": self.occurred_at,
            "platform": self.platform,
            "user": self.user,
        }


@dataclass(frozen=True)
class RuleContract:
    contract_id: str
    definition_id: str
    grade: str
    conditions: tuple[Condition, ...]
    version: int = 1
    active: bool = True

    def to_wire(self) -> dict:
        return {
            "active": self.active,
            "conditions": [c.to_wire() for c in self.conditions],
            "contract_id": self.contract_id,
            "definition_id": self.definition_id,
            "grade": self.grade,
            "version": self.version,
        }


def conditions_from_wire(wire) -> tuple[Condition, ...]:
    if not isinstance(wire, (list, tuple)) or not wire:
        raise SchemaViolation("conditions must be a non-empty list")
    parsed = []
    for item in wire:
        if not isinstance(item, dict) or not set(item) <= {"action", "min_count", "window_seconds"}:
            raise SchemaViolation("condition must carry only action/min_count/window_seconds")
        action = item.get("action")
        min_count = item.get("min_count")
        window = item.get("window_seconds")
        if not isinstance(action, str) or not action:
            raise SchemaViolation("condition action must be a non-empty string")
        if not isinstance(min_count, int) or isinstance(min_count, bool) or min_count < 1:
            raise SchemaViolation("condition min_count must be an integer >= 1")
        if window is not None and (not isinstance(window, int) or isinstance(window, bool) or window < 1):
            raise SchemaViolation("condition window_seconds must be an integer >= 1")
        parsed.append(Condition(action=action, min_count=min_count, window_seconds=window))
    return tuple(parsed)


def evaluate(contract: RuleContract, log: Sequence[ActivityEvent], now: int) -> bool:
    """True iff every condition's action count meets its floor at time `now`.

    Windowed atoms count events with occurred_at in [now - window, now],
    both ends inclusive; windowless atoms count the entire history up to now.
    """
    if not contract.active:
        raise InactiveContract(f"contract {contract.contract_id} is inactive")
    for condition in contract.conditions:
        floor = None if condition.window_seconds is None else now - condition.window_seconds
        count = 0
        for entry in log:
            if entry.action != condition.action or entry.occurred_at > now:
                continue
            if floor is not None and entry.occurred_at < floor:
                continue
            count += 1
        if count < condition.min_count:
            return False
    return True


def rule_subject_hash(contract_id: str, base_version: int, conditions: Sequence[Condition]) -> str:
    """Canonical digest of a proposed rule change; governance votes bind to it."""
    return canonical_hash(
        {
            "base_version": base_version,
            "conditions": [c.to_wire() for c in conditions],
            "contract_id": contract_id,
        }
    )


class ContractEngine:
    """Owns contracts and per-user activity feeds; mints through the registry.

    Contract bodies and activity are off-chain node state (persisted via the
    on_* hooks); only RuleUpdated and the mints themselves are ledger events.
    """

    def __init__(self, ledger: Ledger, registry: BadgeRegistry):
        self.ledger = ledger
        self.registry = registry
        self.contracts: dict[str, RuleContract] = {}
        self.activity: dict[str, list[ActivityEvent]] = {}
        self.on_create: list[Callable[[RuleContract], None]] = []
        self.on_activity: list[Callable[[ActivityEvent], None]] = []
        ledger.on_commit.append(self.fold_block)

    # -- fold ---------------------------------------------------------------

    def fold_block(self, block: Block) -> None:
        for event in block.events:
            if event.kind is EventKind.RULE_UPDATED:
                p = event.payload
                contract = self.contracts[p["contract_id"]]
                self.contracts[p["contract_id"]] = replace(
                    contract,
                    conditions=conditions_from_wire(p["conditions"]),
                    version=p["new_version"],
                )

    # -- reads ----------------------------------------------------------------

    def get_contract(self, contract_id: str) -> RuleContract:
        contract = self.contracts.get(contract_id)
        if contract is None:
            raise UnknownContract(f"no contract {contract_id}")
        return contract

    def user_log(self, user: str) -> list[ActivityEvent]:
        return list(self.activity.get(user, []))

    def snapshot(self) -> dict:
        return {
            "activity": {u: [a.to_wire() for a in log] for u, log in self.activity.items()},
            "contracts": {c: v.to_wire() for c, v in self.contracts.items()},
        }

    # -- writes ---------------------------------------------------------------

    def restore_contract(self, wire: dict) -> RuleContract:
        contract = RuleContract(
            contract_id=wire["contract_id"],
            definition_id=wire["definition_id"],
            grade=wire["grade"],
            conditions=conditions_from_wire(wire["conditions"]),
            version=wire["version"],
            active=wire["active"],
        )
        self.contracts[contract.contract_id] = contract
        return contract

    def create_contract(
        self,
        definition_id: str,
        grade: str,
        conditions,
        author: str,
    ) -> RuleContract:
        definition = self.registry.get_definition(definition_id)
        if author != definition.issuer:
            raise IssuerMismatch("only the defining platform may attach issuance rules")
        if grade not in definition.grade_levels:
            raise SchemaViolation(f"grade {grade!r} not in definition's grade levels")
        parsed = conditions_from_wire(conditions)
        contract_id = canonical_hash(
            {
                "conditions": [c.to_wire() for c in parsed],
                "created_at": self.ledger.now(),
                "definition_id": definition_id,
                "grade": grade,
                "seq": len(self.contracts),
            }
        )
        contract = RuleContract(
            contract_id=contract_id,
            definition_id=definition_id,
            grade=grade,
            conditions=parsed,
        )
        self.contracts[contract_id] = contract
        for callback in self.on_create:
            callback(contract)
        return contract

    def ingest_activity(
        self,
        user: str,
        action: str,
        platform: str,
        occurred_at: int,
        attributes: Optional[dict] = None,
    ) -> ActivityEvent:
        if not isinstance(user, str) or not user or not isinstance(action, str) or not action:
            raise SchemaViolation("activity must carry a user and an action")
        if not isinstance(occurred_at, int) or isinstance(occurred_at, bool) or occurred_at < 0:
            raise SchemaViolation("occurred_at must be a non-negative integer")
        log = self.activity.setdefault(user, [])
        if log and occurred_at < log[-1].occurred_at:
            raise SchemaViolation("activity timestamps must be non-decreasing per user")
        entry = ActivityEvent(
            user=user,
            action=action,
            platform=platform,
            occurred_at=occurred_at,
            attributes=dict(attributes or {}),
        )
        log.append(entry)
        for callback in self.on_activity:
            callback(entry)
        return entry

    def execute_issuance(
        self,
        contract_id: str,
        user: str,
        now: Optional[int] = None,
        author: Optional[str] = None,
    ) -> BadgeToken:
        contract = self.get_contract(contract_id)
        at = self.ledger.now() if now is None else now
        if not evaluate(contract, self.activity.get(user, []), at):
            raise NotEligible(f"{user} does not meet contract {contract_id}")
        definition = self.registry.get_definition(contract.definition_id)
        return self.registry.mint_token(
            contract.definition_id,
            user,
            contract.grade,
            issuer=definition.issuer,
            author=author or definition.issuer,
        )

    def update_rules(
        self,
        contract_id: str,
        new_conditions,
        tally: TallyResult,
        base_version: Optional[int] = None,
        author: Optional[str] = None,
    ) -> RuleContract:
        contract = self.get_contract(contract_id)
        parsed = conditions_from_wire(new_conditions)
        if base_version is None:
            base_version = contract.version
        if not tally.passing:
            raise VoteNotPassing(f"round {tally.round_id} did not pass")
        expected = rule_subject_hash(contract_id, base_version, parsed)
        if tally.subject_hash != expected:
            raise VoteSubjectMismatch("tally is bound to a different rule change")
        if base_version != contract.version:
            raise StaleVersion(
                f"change targets version {base_version}, contract is at {contract.version}"
            )
        now = self.ledger.now()
        payload = {
            "conditions": [c.to_wire() for c in parsed],
            "contract_id": contract_id,
            "new_version": contract.version + 1,
            "old_version": contract.version,
            "round_id": tally.round_id,
            "subject_hash": tally.subject_hash,
            "tally_digest": tally.digest(),
        }
        author_id = author or self.registry.get_definition(contract.definition_id).issuer
        self.ledger.commit([make_event(EventKind.RULE_UPDATED, payload, author_id, now)])
        return self.contracts[contract_id]
