"""Node lifecycle: bootstrap, full workloads, crash recovery, authorization."""

from __future__ import annotations

import json

import pytest

from medalchain.canon import sha256_hex
from medalchain.config import NodeConfig
from medalchain.contracts import conditions_from_wire, rule_subject_hash
from medalchain.certification import ReviewRecord
from medalchain.credentials import Role
from medalchain.errors import (
    AlreadyIssued,
    CorruptLog,
    NotEligible,
    SchemaViolation,
    Unauthorized,
    UnknownActor,
)
from medalchain.node import AUTHORITY_KEY_FILENAME, OPERATION_ROLES, MedalNode
from medalchain.rsa import RsaKeyPair
from medalchain.storage import AppendLog, encode_record
from tests.conftest import FakeClock
from tests.helpers import PLATFORM_KEY, USER_KEYS, enroll_cast, vote_in_round

CONFIG = NodeConfig(difficulty=2, quorum=2, key_bits=64)


@pytest.fixture
def clock():
    return FakeClock()


@pytest.fixture
def node(tmp_path, clock):
    built, _ = MedalNode.create(tmp_path / "data", config=CONFIG, clock=clock, key_seed=7)
    return built


def full_workload(node, clock) -> dict:
    """Exercise every service; returns handles the assertions need."""
    enroll_cast(node)
    definition = node.registry.register_definition(
        name="Trail Guide",
        icon=sha256_hex(b"trail-guide.png"),
        description="Knows the mountain paths.",
        criteria="Lead three documented hikes.",
        grade_levels=["bronze", "silver"],
        issuer="forge-academy",
    )
    clock.tick()
    token = node.registry.mint_token(definition.definition_id, "alice", "silver", "forge-academy")
    contract = node.contracts.create_contract(
        definition.definition_id,
        "bronze",
        [{"action": "hike_led", "min_count": 2}],
        author="forge-academy",
    )
    for _ in range(2):
        clock.tick()
        node.contracts.ingest_activity(
            user="bob", action="hike_led", platform="forge-academy",
            occurred_at=clock.t, attributes={},
        )
    earned = node.contracts.execute_issuance(contract.contract_id, "bob")

    # Governance: vote through a rule change with real anonymous ballots.
    new_conditions = [{"action": "hike_led", "min_count": 3}]
    subject = rule_subject_hash(
        contract.contract_id, contract.version, conditions_from_wire(new_conditions)
    )
    rnd = node.voting.open_round(
        subject_hash=subject,
        voters=["alice", "bob", "carol"],
        quorum=2,
        threshold="1/2",
        author="central-authority",
    )
    for voter in ("alice", "bob"):
        clock.tick()
        vote_in_round(node.voting, rnd.round_id, voter, "approve", seed=3)
    clock.tick()
    tally = node.voting.close_round(rnd.round_id, author="central-authority")
    updated = node.contracts.update_rules(
        contract.contract_id, new_conditions, tally, author="forge-academy"
    )

    # Certification paperwork through to an approved, certified definition.
    app = node.certification.submit_application(
        platform="forge-academy",
        definition_id=definition.definition_id,
        awarding_rules="Issued for completed, verified hikes.",
        sample_awards=[{"token_id": token.token_id, "holder": "alice", "proof_ref": "log#1"}],
        voting_data="2 approvals of 2 ballots cast",
    )
    node.certification.begin_review(app.application_id, reviewer="central-authority")
    clock.tick()
    review = ReviewRecord(
        compliance_ok=True, design_ok=True, platform_ok=True, security_ok=True,
        notes={"compliance": "ok", "design": "ok", "platform": "ok", "security": "ok"},
        reviewer="central-authority", reviewed_at=clock.t,
    )
    node.certification.decide(app.application_id, review, approve=True)
    outcome = node.certification.certify(
        app.application_id, official_description="Verified hiking guide.",
        author="central-authority",
    )

    clock.tick()
    node.registry.freeze_token(earned.token_id, author="central-authority")
    clock.tick()
    node.registry.restore_token(earned.token_id, author="central-authority")
    return {
        "definition": definition,
        "token": token,
        "contract": updated,
        "round_id": rnd.round_id,
        "application": app,
        "outcome": outcome,
        "earned": earned,
    }


class TestBootstrap:
    def test_create_enrolls_exactly_one_authority(self, node):
        assert node.credentials.authority.actor_id == "central-authority"
        assert len(node.credentials) == 1

    def test_create_refuses_existing_directory(self, tmp_path, clock):
        MedalNode.create(tmp_path / "d", config=CONFIG, clock=clock, key_seed=1)
        with pytest.raises(FileExistsError):
            MedalNode.create(tmp_path / "d", config=CONFIG, clock=clock, key_seed=1)

    def test_authority_key_file_round_trips(self, node):
        raw = json.loads((node.data_dir / AUTHORITY_KEY_FILENAME).read_text())
        key = RsaKeyPair.from_wire(raw["key"])
        assert raw["actor_id"] == "central-authority"
        assert key.public == node.credentials.authority.public_key

    def test_config_is_persisted_and_reloaded(self, node):
        reopened = MedalNode.open(node.data_dir)
        assert reopened.config == CONFIG

    def test_fresh_node_digest_is_reproducible(self, node):
        assert node.state_digest() == MedalNode.open(node.data_dir).state_digest()


class TestCrashRecovery:
    def test_full_workload_survives_replay(self, node, clock):
        handles = full_workload(node, clock)
        before = node.state_digest()
        reopened = MedalNode.open(node.data_dir, clock=clock)
        assert reopened.state_digest() == before
        # Spot checks behind the digest: chain, token status, contract version.
        assert reopened.ledger.height == node.ledger.height
        token = reopened.registry.get_token(handles["token"].token_id)
        assert token.status.value == "Certified"
        assert reopened.contracts.get_contract(handles["contract"].contract_id).version == 2

    def test_replay_is_idempotent_across_generations(self, node, clock):
        full_workload(node, clock)
        first = MedalNode.open(node.data_dir, clock=clock)
        second = MedalNode.open(node.data_dir, clock=clock)
        assert first.state_digest() == second.state_digest() == node.state_digest()

    def test_round_secrets_survive_replay(self, node, clock):
        enroll_cast(node)
        rnd = node.voting.open_round(
            subject_hash=sha256_hex(b"subject"),
            voters=["alice", "bob", "carol"],
            quorum=2,
            threshold="1/2",
            author="central-authority",
        )
        vote_in_round(node.voting, rnd.round_id, "alice", "approve")
        reopened = MedalNode.open(node.data_dir, clock=clock)
        # The registrar still refuses a second ballot for alice...
        with pytest.raises(AlreadyIssued):
            vote_in_round(reopened.voting, rnd.round_id, "alice", "approve")
        # ...still knows who is eligible...
        with pytest.raises(NotEligible):
            vote_in_round(reopened.voting, rnd.round_id, "mallory", "approve")
        # ...and can still issue to the remaining voters with the same key.
        receipt = vote_in_round(reopened.voting, rnd.round_id, "bob", "approve")
        assert reopened.voting.get_round(rnd.round_id).counts["approve"] == 2
        assert receipt["round_id"] == rnd.round_id

    def test_mutations_after_reopen_keep_accumulating(self, node, clock):
        handles = full_workload(node, clock)
        reopened = MedalNode.open(node.data_dir, clock=clock)
        clock.tick()
        reopened.registry.revoke_token(handles["earned"].token_id, author="central-authority")
        third = MedalNode.open(node.data_dir, clock=clock)
        assert third.state_digest() == reopened.state_digest()
        assert third.registry.get_token(handles["earned"].token_id).status.value == "Revoked"

    def test_digest_changes_with_every_mutation(self, node, clock):
        seen = {node.state_digest()}
        enroll_cast(node)
        seen.add(node.state_digest())
        node.registry.register_definition(
            name="N", icon=sha256_hex(b"i"), description="d", criteria="c",
            grade_levels=["g"], issuer="forge-academy",
        )
        seen.add(node.state_digest())
        assert len(seen) == 3


class TestLogDamage:
    def test_flipped_byte_fails_open(self, node, clock):
        full_workload(node, clock)
        path = node.log.path
        blob = bytearray(path.read_bytes())
        blob[len(blob) // 2] ^= 0x40
        path.write_bytes(bytes(blob))
        with pytest.raises(CorruptLog):
            MedalNode.open(node.data_dir, clock=clock)

    def test_unknown_record_kind_fails_open(self, node, clock):
        node.log.append("mystery", {"x": 1})
        with pytest.raises(CorruptLog):
            MedalNode.open(node.data_dir, clock=clock)

    def test_wrong_shaped_record_fails_open(self, node, clock):
        node.log.append("round", {"round_id": "r"})  # missing voters/key
        with pytest.raises(CorruptLog):
            MedalNode.open(node.data_dir, clock=clock)

    def test_truncated_log_fails_open(self, node, clock):
        full_workload(node, clock)
        path = node.log.path
        blob = path.read_bytes()
        path.write_bytes(blob[: len(blob) - 7])
        with pytest.raises(CorruptLog):
            MedalNode.open(node.data_dir, clock=clock)


class TestAuthorization:
    def test_role_table_covers_all_operations(self, node):
        enroll_cast(node)
        for operation, roles in OPERATION_ROLES.items():
            for actor, role in (
                ("central-authority", Role.AUTHORITY),
                ("forge-academy", Role.PLATFORM),
                ("alice", Role.USER),
            ):
                if role in roles:
                    assert node.authorize(actor, operation).actor_id == actor
                else:
                    with pytest.raises(Unauthorized):
                        node.authorize(actor, operation)

    def test_authority_only_operations(self, node):
        enroll_cast(node)
        for operation in ("freeze", "revoke", "restore", "begin_review", "decide", "certify", "enroll"):
            assert OPERATION_ROLES[operation] == (Role.AUTHORITY,)
            with pytest.raises(Unauthorized):
                node.authorize("forge-academy", operation)

    def test_unknown_operation_rejected(self, node):
        with pytest.raises(SchemaViolation):
            node.authorize("central-authority", "format_disk")

    def test_unknown_actor_rejected(self, node):
        with pytest.raises(UnknownActor):
            node.authorize("ghost", "mint")


class TestEnrollment:
    def test_enrollment_is_persisted(self, node):
        node.enroll("alice", Role.USER, USER_KEYS["alice"].public)
        reopened = MedalNode.open(node.data_dir)
        assert reopened.credentials.get("alice").public_key == USER_KEYS["alice"].public

    def test_second_authority_refused(self, node):
        with pytest.raises(SchemaViolation):
            node.enroll("usurper", Role.AUTHORITY, PLATFORM_KEY.public)

    def test_bad_role_string_refused(self, node):
        with pytest.raises(SchemaViolation):
            node.enroll("x", "Admin", PLATFORM_KEY.public)

    def test_role_accepts_wire_string(self, node):
        assert node.enroll("p2", "Platform", PLATFORM_KEY.public).role is Role.PLATFORM


class TestViews:
    def test_chain_tip_shape(self, node, clock):
        tip = node.chain_tip()
        assert tip == {
            "height": 0,
            "tip_hash": node.ledger.tip_hash,
            "total_work": 1,
        }
        full_workload(node, clock)
        tip = node.chain_tip()
        assert tip["height"] == node.ledger.height > 0

    def test_export_chain_is_wire_blocks(self, node, clock):
        full_workload(node, clock)
        exported = node.export_chain()
        assert [b["header"]["height"] for b in exported] == list(range(node.ledger.height + 1))
