"""A full node: ledger, services, credentials, and durable storage.

Everything a node knows is reconstructible from its append-only log. Chain
blocks are logged as they commit and re-applied through the same fold
functions on startup, so live operation and crash recovery exercise one code
path. Side-channel state that never touches the chain — credentials, voter
rosters and round signing keys, issued-ballot marks, contracts, application
paperwork, activity feeds — is logged as typed records alongside the blocks,
in the order it was created.
"""

from __future__ import annotations

import json
import time
from pathlib import Path
from typing import Callable, Optional

from .canon import canonical_hash
from .certification import CertificationService
from .chain import Ledger, block_from_wire
from .config import NodeConfig
from .contracts import ContractEngine
from .credentials import Credential, CredentialStore, Role
from .errors import CorruptLog, SchemaViolation
from .registry import BadgeRegistry
from .rsa import RsaKeyPair, RsaPublicKey, keygen
from .storage import AppendLog, LogRecord
from .voting import VotingService

LOG_FILENAME = "node.log"
AUTHORITY_KEY_FILENAME = "authority_key.json"

# Which roles may invoke which mutation. Finer ownership rules (a platform
# may only mint against its own definitions, and so on) live in the services.
OPERATION_ROLES: dict[str, tuple[Role, ...]] = {
    "enroll": (Role.AUTHORITY,),
    "define": (Role.PLATFORM,),
    "mint": (Role.PLATFORM,),
    "freeze": (Role.AUTHORITY,),
    "revoke": (Role.AUTHORITY,),
    "restore": (Role.AUTHORITY,),
    "create_contract": (Role.PLATFORM,),
    "update_rules": (Role.PLATFORM,),
    "activity": (Role.PLATFORM,),
    "execute": (Role.PLATFORM, Role.USER),
    "submit_application": (Role.PLATFORM,),
    "resubmit": (Role.PLATFORM,),
    "withdraw": (Role.PLATFORM,),
    "begin_review": (Role.AUTHORITY,),
    "decide": (Role.AUTHORITY,),
    "certify": (Role.AUTHORITY,),
    "open_round": (Role.AUTHORITY, Role.PLATFORM),
    "close_round": (Role.AUTHORITY, Role.PLATFORM),
    "request_ballot": (Role.AUTHORITY, Role.PLATFORM, Role.USER),
}


def _wall_clock() -> int:
    return int(time.time())


class MedalNode:
    """One process-local node instance bound to a data directory."""

    def __init__(
        self,
        data_dir: Path | str,
        config: NodeConfig,
        log: AppendLog,
        clock: Optional[Callable[[], int]] = None,
    ):
        self.data_dir = Path(data_dir)
        self.config = config
        self.log = log
        self.clock = clock or _wall_clock
        self.ledger = Ledger(difficulty=config.difficulty, clock=self.clock)
        self.credentials = CredentialStore()
        self.registry = BadgeRegistry(self.ledger)
        self.voting = VotingService(self.ledger, key_bits=config.key_bits)
        self.contracts = ContractEngine(self.ledger, self.registry)
        self.certification = CertificationService(self.ledger, self.registry)
        self._replaying = False
        self.ledger.on_commit.append(self._persist_block)
        self.voting.on_open.append(self._persist_round)
        self.voting.on_issue.append(self._persist_ballot)
        self.contracts.on_create.append(self._persist_contract)
        self.contracts.on_activity.append(self._persist_activity)
        self.certification.on_change.append(self._persist_application)

    # -- lifecycle -----------------------------------------------------------

    @classmethod
    def create(
        cls,
        data_dir: Path | str,
        config: Optional[NodeConfig] = None,
        clock: Optional[Callable[[], int]] = None,
        authority_id: str = "central-authority",
        key_seed: Optional[int] = None,
    ) -> tuple["MedalNode", RsaKeyPair]:
        """Initialise a fresh data directory; refuses to touch an existing one."""
        data_dir = Path(data_dir)
        log_path = data_dir / LOG_FILENAME
        if log_path.exists():
            raise FileExistsError(f"{data_dir} is already initialised")
        data_dir.mkdir(parents=True, exist_ok=True)
        config = config or NodeConfig()
        config.write(data_dir)
        log = AppendLog.create(log_path)
        node = cls(data_dir, config, log, clock=clock)
        key = keygen(config.key_bits, seed=key_seed)
        node.enroll(authority_id, Role.AUTHORITY, key.public)
        key_path = data_dir / AUTHORITY_KEY_FILENAME
        key_path.write_text(
            json.dumps(
                {"actor_id": authority_id, "key": key.to_wire()}, indent=2, sort_keys=True
            )
            + "\n",
            encoding="utf-8",
        )
        return node, key

    @classmethod
    def open(
        cls, data_dir: Path | str, clock: Optional[Callable[[], int]] = None
    ) -> "MedalNode":
        """Rebuild a node from its data directory by replaying the log."""
        data_dir = Path(data_dir)
        config = NodeConfig.load(data_dir)
        log = AppendLog(data_dir / LOG_FILENAME)
        node = cls(data_dir, config, log, clock=clock)
        node._replay(log.replay())
        return node

    def _replay(self, records: list[LogRecord]) -> None:
        self._replaying = True
        try:
            for record in records:
                self._apply_record(record)
        finally:
            self._replaying = False

    def _apply_record(self, record: LogRecord) -> None:
        kind, body = record.kind, record.body
        try:
            if kind == "credential":
                self.credentials.add(Credential.from_wire(body))
            elif kind == "block":
                self.ledger.append_block(block_from_wire(body))
            elif kind == "round":
                self.voting.restore_round(
                    body["round_id"], body["voters"], RsaKeyPair.from_wire(body["key"])
                )
            elif kind == "ballot":
                self.voting.restore_issued(body["round_id"], body["voter"])
            elif kind == "contract":
                self.contracts.restore_contract(body)
            elif kind == "application":
                self.certification.restore_application(body)
            elif kind == "activity":
                self.contracts.ingest_activity(
                    user=body["user"],
                    action=body["action"],
                    platform=body["platform"],
                    occurred_at=body["occurred_at"],
                    attributes=body["attributes"],
                )
            else:
                raise CorruptLog(f"unknown record kind {kind!r}", offset=record.offset)
        except (KeyError, TypeError) as exc:
            raise CorruptLog(
                f"{kind} record is missing fields: {exc}", offset=record.offset
            ) from exc

    # -- persistence hooks -----------------------------------------------------

    def _write(self, kind: str, body) -> None:
        if not self._replaying:
            self.log.append(kind, body)

    def _persist_block(self, block) -> None:
        if block.header.height > 0:
            self._write("block", block.to_wire())

    def _persist_round(self, rnd, key: RsaKeyPair) -> None:
        self._write(
            "round",
            {
                "key": key.to_wire(),
                "round_id": rnd.round_id,
                "voters": sorted(rnd.eligible_voters),
            },
        )

    def _persist_ballot(self, round_id: str, voter: str) -> None:
        self._write("ballot", {"round_id": round_id, "voter": voter})

    def _persist_contract(self, contract) -> None:
        self._write("contract", contract.to_wire())

    def _persist_activity(self, entry) -> None:
        self._write("activity", entry.to_wire())

    def _persist_application(self, app) -> None:
        self._write("application", app.to_wire())

    # -- identity and authorisation ---------------------------------------------

    def now(self) -> int:
        return self.ledger.now()

    def enroll(
        self,
        actor_id: str,
        role: Role | str,
        public_key: RsaPublicKey,
        issued_at: Optional[int] = None,
    ) -> Credential:
        try:
            role = role if isinstance(role, Role) else Role(role)
        except ValueError:
            raise SchemaViolation(f"unknown role {role!r}")
        credential = Credential(
            actor_id=actor_id,
            role=role,
            public_key=public_key,
            issued_at=self.now() if issued_at is None else issued_at,
        )
        if not credential.actor_id or not isinstance(credential.actor_id, str):
            raise SchemaViolation("actor_id must be a non-empty string")
        self.credentials.add(credential)
        self._write("credential", credential.to_wire())
        return credential

    def authorize(self, actor_id: str, operation: str) -> Credential:
        roles = OPERATION_ROLES.get(operation)
        if roles is None:
            raise SchemaViolation(f"unknown operation {operation!r}")
        return self.credentials.require_role(actor_id, *roles)

    # -- whole-node views ---------------------------------------------------------

    def state_digest(self) -> str:
        """One hash over everything the node believes; equal digests mean
        byte-equal replayable state."""
        return canonical_hash(
            {
                "applications": self.certification.snapshot(),
                "blocks": [b.to_wire() for b in self.ledger.blocks],
                "contracts": self.contracts.snapshot(),
                "credentials": [c.to_wire() for c in self.credentials.actors()],
                "registry": self.registry.snapshot(),
                "voting": self.voting.snapshot(),
            }
        )

    def chain_tip(self) -> dict:
        return {
            "height": self.ledger.height,
            "tip_hash": self.ledger.tip_hash,
            "total_work": self.ledger.total_work(),
        }

    def export_chain(self) -> list[dict]:
        return [b.to_wire() for b in self.ledger.blocks]
