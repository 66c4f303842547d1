"""Application workflow, the four-check review, and token certification."""

import pytest

from medalchain.certification import (
    APPLICATION_ACTIONS,
    APPLICATION_TRANSITIONS,
    ApplicationState,
    CertificationApplication,
    CertificationService,
    ReviewRecord,
)
from medalchain.errors import (
    DanglingSample,
    ForeignDefinition,
    IllegalTransition,
    IncompleteReview,
    NotApproved,
    Unauthorized,
    UnknownApplication,
    UnknownDefinition,
)
from medalchain.events import EventKind
from medalchain.registry import TokenStatus

PLATFORM = "forge-academy"
AUTHORITY = "central-authority"


def review(ok=True, **overrides):
    fields = dict(
        compliance_ok=ok,
        design_ok=ok,
        platform_ok=ok,
        security_ok=ok,
        notes={"compliance": "ok", "design": "ok", "platform": "ok", "security": "ok"},
        reviewer=AUTHORITY,
        reviewed_at=1_000_500,
    )
    fields.update(overrides)
    return ReviewRecord(**fields)


@pytest.fixture
def service(ledger, registry):
    return CertificationService(ledger, registry)


@pytest.fixture
def tokens(registry, definition):
    return [
        registry.mint_token(definition.definition_id, holder, "gold", PLATFORM)
        for holder in ("alice", "bob", "carol")
    ]


def submit(service, definition, tokens=(), voting_data=""):
    return service.submit_application(
        platform=PLATFORM,
        definition_id=definition.definition_id,
        awarding_rules="Pass the capstone review, judged by two assessors.",
        sample_awards=[
            {"token_id": t.token_id, "holder": t.holder, "proof_ref": f"evidence/{t.holder}"}
            for t in tokens
        ],
        voting_data=voting_data,
    )


class TestSubmission:
    def test_happy_path(self, service, definition, tokens):
        app = submit(service, definition, tokens[:2])
        assert app.state is ApplicationState.SUBMITTED
        assert app.revision == 1
        assert len(app.sample_awards) == 2

    def test_submission_stays_off_chain(self, service, definition, ledger):
        height = ledger.height
        submit(service, definition)
        assert ledger.height == height

    def test_unknown_definition(self, service):
        with pytest.raises(UnknownDefinition):
            service.submit_application(
                platform=PLATFORM, definition_id="ab" * 32, awarding_rules="rules"
            )

    def test_foreign_definition(self, service, definition):
        with pytest.raises(ForeignDefinition):
            service.submit_application(
                platform="rival-academy",
                definition_id=definition.definition_id,
                awarding_rules="rules",
            )

    def test_revoked_sample_rejected(self, service, registry, definition, tokens):
        registry.revoke_token(tokens[0].token_id, AUTHORITY)
        with pytest.raises(DanglingSample):
            submit(service, definition, tokens[:1])

    def test_wrong_holder_sample_rejected(self, service, definition, tokens):
        with pytest.raises(DanglingSample):
            service.submit_application(
                platform=PLATFORM,
                definition_id=definition.definition_id,
                awarding_rules="rules",
                sample_awards=[
                    {"token_id": tokens[0].token_id, "holder": "mallory", "proof_ref": "x"}
                ],
            )

    def test_sample_for_other_definition_rejected(self, service, registry, definition, tokens):
        from medalchain.canon import sha256_hex

        other = registry.register_definition(
            name="Other Badge",
            icon=sha256_hex(b"other"),
            description="",
            criteria="Different track.",
            grade_levels=["gold"],
            issuer=PLATFORM,
        )
        foreign_token = registry.mint_token(other.definition_id, "alice", "gold", PLATFORM)
        with pytest.raises(DanglingSample):
            submit(service, definition, [foreign_token])


class TestReviewAndDecision:
    def test_begin_review_records_reviewer(self, service, definition):
        app = submit(service, definition)
        app = service.begin_review(app.application_id, AUTHORITY)
        assert app.state is ApplicationState.UNDER_REVIEW
        assert app.reviewer == AUTHORITY

    def test_begin_review_requires_submitted(self, service, definition):
        app = submit(service, definition)
        service.begin_review(app.application_id, AUTHORITY)
        with pytest.raises(IllegalTransition):
            service.begin_review(app.application_id, AUTHORITY)

    def test_approval_hits_the_ledger(self, service, definition, ledger):
        app = submit(service, definition)
        service.begin_review(app.application_id, AUTHORITY)
        decided = service.decide(app.application_id, review(), approve=True)
        assert decided.state is ApplicationState.APPROVED
        events = [e for e in ledger.events() if e.kind is EventKind.APPLICATION_DECISION]
        assert len(events) == 1
        payload = events[0].payload
        assert payload["decision"] == "approve"
        assert payload["application_hash"] == app.content_hash()
        assert all(payload[f"{c}_ok"] for c in ("compliance", "design", "platform", "security"))

    def test_rejection_keeps_reason(self, service, definition):
        app = submit(service, definition)
        service.begin_review(app.application_id, AUTHORITY)
        decided = service.decide(
            app.application_id,
            review(security_ok=False),
            approve=False,
            rejection_reason="Signature scheme on award records is replayable.",
        )
        assert decided.state is ApplicationState.REJECTED
        assert "replayable" in decided.rejection_reason

    def test_approve_with_failing_check_is_incomplete(self, service, definition):
        app = submit(service, definition)
        service.begin_review(app.application_id, AUTHORITY)
        with pytest.raises(IncompleteReview):
            service.decide(app.application_id, review(design_ok=False), approve=True)

    def test_reject_needs_a_failing_check_and_reason(self, service, definition):
        app = submit(service, definition)
        service.begin_review(app.application_id, AUTHORITY)
        with pytest.raises(IncompleteReview):
            service.decide(app.application_id, review(), approve=False, rejection_reason="because")
        with pytest.raises(IncompleteReview):
            service.decide(app.application_id, review(platform_ok=False), approve=False)

    def test_missing_notes_is_incomplete(self, service, definition):
        app = submit(service, definition)
        service.begin_review(app.application_id, AUTHORITY)
        with pytest.raises(IncompleteReview):
            service.decide(
                app.application_id, review(notes={"compliance": "ok"}), approve=True
            )

    def test_decide_requires_under_review(self, service, definition):
        app = submit(service, definition)
        with pytest.raises(IllegalTransition):
            service.decide(app.application_id, review(), approve=True)


def approved_app(service, definition, tokens=()):
    app = submit(service, definition, tokens)
    service.begin_review(app.application_id, AUTHORITY)
    return service.decide(app.application_id, review(), approve=True)


class TestCertify:
    def test_upgrades_every_live_platform_token(self, service, registry, definition, tokens, ledger):
        app = approved_app(service, definition, tokens)
        report = service.certify(app.application_id, "Nationally certified.", author=AUTHORITY)
        assert sorted(report["certified"]) == sorted(t.token_id for t in tokens)
        assert report["skipped"] == []
        for t in tokens:
            updated = registry.get_token(t.token_id)
            assert updated.status is TokenStatus.CERTIFIED
            assert updated.official_description == "Nationally certified."
        certs = [e for e in ledger.events() if e.kind is EventKind.TOKEN_CERTIFIED]
        links = [e for e in ledger.events() if e.kind is EventKind.RECORD_LINKED]
        assert len(certs) == 3 and len(links) == 3

    def test_batch_is_one_block(self, service, definition, tokens, ledger):
        app = approved_app(service, definition, tokens)
        before = ledger.height
        service.certify(app.application_id, author=AUTHORITY)
        assert ledger.height == before + 1
        assert len(ledger.tip.events) == 6

    def test_idempotent(self, service, definition, tokens, ledger):
        app = approved_app(service, definition, tokens)
        service.certify(app.application_id, author=AUTHORITY)
        height = ledger.height
        report = service.certify(app.application_id, author=AUTHORITY)
        assert report["events_appended"] == 0
        assert [s["reason"] for s in report["skipped"]] == ["already certified"] * 3
        assert ledger.height == height

    def test_frozen_token_skipped(self, service, registry, definition, tokens):
        registry.freeze_token(tokens[1].token_id, AUTHORITY)
        app = approved_app(service, definition)
        report = service.certify(app.application_id, author=AUTHORITY)
        assert len(report["certified"]) == 2
        assert {"reason": "frozen", "token_id": tokens[1].token_id} in report["skipped"]
        assert registry.get_token(tokens[1].token_id).status is TokenStatus.FROZEN

    def test_requires_approval(self, service, definition):
        app = submit(service, definition)
        with pytest.raises(NotApproved):
            service.certify(app.application_id)

    def test_links_fold_from_chain(self, service, definition, tokens):
        app = approved_app(service, definition, tokens)
        service.certify(app.application_id, author=AUTHORITY)
        assert service.links == {t.token_id: app.application_id for t in tokens}


class TestResubmitWithdraw:
    def rejected_app(self, service, definition):
        app = submit(service, definition)
        service.begin_review(app.application_id, AUTHORITY)
        return service.decide(
            app.application_id, review(design_ok=False), approve=False, rejection_reason="unclear"
        )

    def test_resubmit_bumps_revision_and_clears_review(self, service, definition):
        app = self.rejected_app(service, definition)
        again = service.resubmit(
            app.application_id, PLATFORM, awarding_rules="Clarified: two assessors, rubric v2."
        )
        assert again.state is ApplicationState.SUBMITTED
        assert again.revision == 2
        assert again.review is None
        assert again.rejection_reason == ""
        assert again.content_hash() != app.content_hash()

    def test_resubmit_requires_rejected(self, service, definition):
        app = submit(service, definition)
        with pytest.raises(IllegalTransition):
            service.resubmit(app.application_id, PLATFORM, awarding_rules="x")

    def test_resubmit_by_stranger_rejected(self, service, definition):
        app = self.rejected_app(service, definition)
        with pytest.raises(Unauthorized):
            service.resubmit(app.application_id, "rival-academy", awarding_rules="x")

    def test_withdraw_from_submitted_and_rejected(self, service, definition):
        app = submit(service, definition)
        assert service.withdraw(app.application_id, PLATFORM).state is ApplicationState.WITHDRAWN
        app2 = self.rejected_app(service, definition)
        assert service.withdraw(app2.application_id, PLATFORM).state is ApplicationState.WITHDRAWN

    def test_withdraw_from_terminal_or_under_review_is_illegal(self, service, definition):
        app = approved_app(service, definition)
        with pytest.raises(IllegalTransition):
            service.withdraw(app.application_id, PLATFORM)
        app2 = submit(service, definition)
        service.begin_review(app2.application_id, AUTHORITY)
        with pytest.raises(IllegalTransition):
            service.withdraw(app2.application_id, PLATFORM)

    def test_unknown_application(self, service):
        with pytest.raises(UnknownApplication):
            service.withdraw("nope", PLATFORM)


class TestStateMachineTable:
    def test_terminal_states_have_no_outgoing_edges(self):
        for state in (ApplicationState.APPROVED, ApplicationState.WITHDRAWN):
            assert all(s is not state for s, _ in APPLICATION_TRANSITIONS)

    def test_every_action_appears(self):
        assert {a for _, a in APPLICATION_TRANSITIONS} == set(APPLICATION_ACTIONS)

    def test_wire_round_trip(self, service, definition, tokens):
        app = approved_app(service, definition, tokens)
        assert CertificationApplication.from_wire(app.to_wire()) == app
