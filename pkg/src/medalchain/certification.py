"""Central certification workflow for platform badges.

Applications are off-chain workflow state; only the authority's decision and
the resulting token upgrades/linkages land on the ledger. The state machine
is the single source of truth for which actions are legal.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, Optional, Sequence

from .canon import canonical_hash
from .chain import Block, Ledger
from .errors import (
    DanglingSample,
    ForeignDefinition,
    IllegalTransition,
    IncompleteReview,
    NotApproved,
    SchemaViolation,
    Unauthorized,
    UnknownApplication,
)
from .events import EventKind, make_event
from .registry import BadgeRegistry, TokenStatus


class ApplicationState(str, Enum):
    DRAFT = "Draft"
    SUBMITTED = "Submitted"
    UNDER_REVIEW = "UnderReview"
    APPROVED = "Approved"
    REJECTED = "Rejected"
    WITHDRAWN = "Withdrawn"


#: (state, action) -> next state. Approved and Withdrawn are terminal: they
#: appear on no left-hand side.
APPLICATION_TRANSITIONS: dict[tuple[ApplicationState, str], ApplicationState] = {
    (ApplicationState.DRAFT, "submit"): ApplicationState.SUBMITTED,
    (ApplicationState.DRAFT, "withdraw"): ApplicationState.WITHDRAWN,
    (ApplicationState.SUBMITTED, "begin_review"): ApplicationState.UNDER_REVIEW,
    (ApplicationState.SUBMITTED, "withdraw"): ApplicationState.WITHDRAWN,
    (ApplicationState.UNDER_REVIEW, "approve"): ApplicationState.APPROVED,
    (ApplicationState.UNDER_REVIEW, "reject"): ApplicationState.REJECTED,
    (ApplicationState.REJECTED, "resubmit"): ApplicationState.SUBMITTED,
    (ApplicationState.REJECTED, "withdraw"): ApplicationState.WITHDRAWN,
}

APPLICATION_ACTIONS = ("submit", "begin_review", "approve", "reject", "resubmit", "withdraw")

REVIEW_CHECKS = ("compliance", "design", "platform", "security")


@dataclass(frozen=True)
class ReviewRecord:
    compliance_ok: bool
    design_ok: bool
    platform_ok: bool
    security_ok: bool
    notes: dict[str, str]
    reviewer: str
    reviewed_at: int

    @property
    def all_ok(self) -> bool:
        return self.compliance_ok and self.design_ok and self.platform_ok and self.security_ok

    def flags(self) -> dict[str, bool]:
        return {
            "compliance_ok": self.compliance_ok,
            "design_ok": self.design_ok,
            "platform_ok": self.platform_ok,
            "security_ok": self.security_ok,
        }

    def to_wire(self) -> dict:
        return {
            "notes": dict(self.notes),
            "reviewed_at": self.reviewed_at,
            "reviewer": self.reviewer,
            **self.flags(),
        }

    @classmethod
    def from_wire(cls, wire: dict) -> "ReviewRecord":
        return cls(
            compliance_ok=wire["compliance_ok"],
            design_ok=wire["design_ok"],
            platform_ok=wire["platform_ok"],
            security_ok=wire["security_ok"],
            notes=dict(wire["notes"]),
            reviewer=wire["reviewer"],
            reviewed_at=wire["reviewed_at"],
        )


def validate_review(review: ReviewRecord) -> None:
    for name, value in review.flags().items():
        if not isinstance(value, bool):
            raise IncompleteReview(f"{name} must be answered true or false")
    missing = [c for c in REVIEW_CHECKS if c not in review.notes]
    if missing:
        raise IncompleteReview(f"missing notes for checks: {', '.join(missing)}")
    if not all(isinstance(v, str) for v in review.notes.values()):
        raise IncompleteReview("review notes must be strings")
    if not review.reviewer:
        raise IncompleteReview("reviewer identity missing")


@dataclass(frozen=True)
class SampleAward:
    token_id: str
    holder: str
    proof_ref: str

    def to_wire(self) -> dict:
        return {"holder": self.holder, "proof_ref": self.proof_ref, "token_id": self.token_id}


@dataclass(frozen=True)
class CertificationApplication:
    application_id: str
    definition_id: str
    platform: str
    awarding_rules: str
    sample_awards: tuple[SampleAward, ...]
    voting_data: str  # round id or tally digest; empty when not supplied
    state: ApplicationState
    revision: int = 1
    review: Optional[ReviewRecord] = None
    rejection_reason: str = ""
    reviewer: str = ""

    def content_hash(self) -> str:
        """Digest of what the platform actually submitted, pinned by revision."""
        return canonical_hash(
            {
                "awarding_rules": self.awarding_rules,
                "definition_id": self.definition_id,
                "platform": self.platform,
                "revision": self.revision,
                "sample_awards": [s.to_wire() for s in self.sample_awards],
                "voting_data": self.voting_data,
            }
        )

    def to_wire(self) -> dict:
        return {
            "application_id": self.application_id,
            "awarding_rules": self.awarding_rules,
            "definition_id": self.definition_id,
            "platform": self.platform,
            "rejection_reason": self.rejection_reason,
            "review": self.review.to_wire() if self.review else {},
            "reviewer": self.reviewer,
            "revision": self.revision,
            "sample_awards": [s.to_wire() for s in self.sample_awards],
            "state": self.state.value,
            "voting_data": self.voting_data,
        }

    @classmethod
    def from_wire(cls, wire: dict) -> "CertificationApplication":
        return cls(
            application_id=wire["application_id"],
            definition_id=wire["definition_id"],
            platform=wire["platform"],
            awarding_rules=wire["awarding_rules"],
            sample_awards=tuple(
                SampleAward(s["token_id"], s["holder"], s["proof_ref"])
                for s in wire["sample_awards"]
            ),
            voting_data=wire["voting_data"],
            state=ApplicationState(wire["state"]),
            revision=wire["revision"],
            review=ReviewRecord.from_wire(wire["review"]) if wire["review"] else None,
            rejection_reason=wire["rejection_reason"],
            reviewer=wire["reviewer"],
        )


def _parse_samples(raw) -> tuple[SampleAward, ...]:
    if not isinstance(raw, (list, tuple)):
        raise SchemaViolation("sample_awards must be a list")
    samples = []
    for item in raw:
        if not isinstance(item, dict) or set(item) != {"holder", "proof_ref", "token_id"}:
            raise SchemaViolation("sample award must carry token_id, holder, proof_ref")
        samples.append(SampleAward(item["token_id"], item["holder"], item["proof_ref"]))
    return tuple(samples)


class CertificationService:
    """Application lifecycle plus the certify step that upgrades tokens."""

    def __init__(self, ledger: Ledger, registry: BadgeRegistry):
        self.ledger = ledger
        self.registry = registry
        self.applications: dict[str, CertificationApplication] = {}
        self.links: dict[str, str] = {}  # token_id -> application_id, from chain
        self.on_change: list[Callable[[CertificationApplication], None]] = []
        ledger.on_commit.append(self.fold_block)

    # -- fold -----------------------------------------------------------------

    def fold_block(self, block: Block) -> None:
        for event in block.events:
            if event.kind is EventKind.RECORD_LINKED:
                self.links[event.payload["token_id"]] = event.payload["application_id"]

    # -- reads ------------------------------------------------------------------

    def get_application(self, application_id: str) -> CertificationApplication:
        app = self.applications.get(application_id)
        if app is None:
            raise UnknownApplication(f"no application {application_id}")
        return app

    def list_applications(self, state: Optional[ApplicationState] = None) -> list[CertificationApplication]:
        apps = sorted(self.applications.values(), key=lambda a: a.application_id)
        if state is None:
            return apps
        return [a for a in apps if a.state is state]

    def snapshot(self) -> dict:
        return {
            "applications": {a: v.to_wire() for a, v in self.applications.items()},
            "links": dict(self.links),
        }

    # -- workflow -----------------------------------------------------------------

    def restore_application(self, wire: dict) -> CertificationApplication:
        app = CertificationApplication.from_wire(wire)
        self.applications[app.application_id] = app
        return app

    def _store(self, app: CertificationApplication) -> CertificationApplication:
        self.applications[app.application_id] = app
        for callback in self.on_change:
            callback(app)
        return app

    def _advance(self, app: CertificationApplication, action: str) -> ApplicationState:
        target = APPLICATION_TRANSITIONS.get((app.state, action))
        if target is None:
            raise IllegalTransition(f"{action} is illegal from state {app.state.value}")
        return target

    def _validate_payload(
        self, definition_id: str, platform: str, awarding_rules, sample_awards, voting_data
    ) -> tuple[tuple[SampleAward, ...], str]:
        definition = self.registry.get_definition(definition_id)
        if definition.issuer != platform:
            raise ForeignDefinition(f"definition belongs to {definition.issuer}")
        if not isinstance(awarding_rules, str) or not awarding_rules:
            raise SchemaViolation("awarding_rules text must be non-empty")
        if voting_data is None:
            voting_data = ""
        if not isinstance(voting_data, str):
            raise SchemaViolation("voting_data must be a reference string")
        samples = _parse_samples(sample_awards)
        for sample in samples:
            token = self.registry.tokens.get(sample.token_id)
            if token is None or not token.live:
                raise DanglingSample(f"sample {sample.token_id} is not a live token")
            if token.definition_id != definition_id:
                raise DanglingSample(f"sample {sample.token_id} is for a different definition")
            if token.holder != sample.holder:
                raise DanglingSample(f"sample {sample.token_id} is not held by {sample.holder}")
        return samples, voting_data

    def submit_application(
        self,
        platform: str,
        definition_id: str,
        awarding_rules: str,
        sample_awards: Sequence[dict] = (),
        voting_data: str = "",
    ) -> CertificationApplication:
        samples, voting_data = self._validate_payload(
            definition_id, platform, awarding_rules, sample_awards, voting_data
        )
        application_id = canonical_hash(
            {
                "definition_id": definition_id,
                "platform": platform,
                "seq": len(self.applications),
                "submitted_at": self.ledger.now(),
            }
        )
        draft = CertificationApplication(
            application_id=application_id,
            definition_id=definition_id,
            platform=platform,
            awarding_rules=awarding_rules,
            sample_awards=samples,
            voting_data=voting_data,
            state=ApplicationState.DRAFT,
        )
        return self._store(replace(draft, state=self._advance(draft, "submit")))

    def begin_review(self, application_id: str, reviewer: str) -> CertificationApplication:
        app = self.get_application(application_id)
        state = self._advance(app, "begin_review")
        return self._store(replace(app, state=state, reviewer=reviewer))

    def decide(
        self,
        application_id: str,
        review: ReviewRecord,
        approve: bool,
        rejection_reason: str = "",
    ) -> CertificationApplication:
        app = self.get_application(application_id)
        action = "approve" if approve else "reject"
        state = self._advance(app, action)
        validate_review(review)
        if approve and not review.all_ok:
            raise IncompleteReview("cannot approve while a check is failing")
        if not approve and review.all_ok:
            raise IncompleteReview("cannot reject with every check passing")
        if not approve and not rejection_reason:
            raise IncompleteReview("rejection requires a stated reason")
        payload = {
            "application_hash": app.content_hash(),
            "application_id": application_id,
            "decision": action,
            "definition_id": app.definition_id,
            "revision": app.revision,
            **review.flags(),
        }
        self.ledger.commit(
            [make_event(EventKind.APPLICATION_DECISION, payload, review.reviewer, review.reviewed_at)]
        )
        return self._store(
            replace(
                app,
                state=state,
                review=review,
                rejection_reason=rejection_reason if not approve else "",
            )
        )

    def certify(
        self, application_id: str, official_description: str = "", author: str = ""
    ) -> dict:
        """Upgrade every eligible platform token of the approved definition.

        All TokenCertified + RecordLinked events for one invocation land in a
        single block, so observers see the certification atomically. Running
        it again finds nothing left to upgrade and appends nothing.
        """
        app = self.get_application(application_id)
        if app.state is not ApplicationState.APPROVED:
            raise NotApproved(f"application is in state {app.state.value}")
        certified_at = self.ledger.now()
        events = []
        certified: list[str] = []
        skipped: list[dict] = []
        for token in self.registry.tokens_of_definition(app.definition_id):
            if token.status is TokenStatus.PLATFORM_ISSUED:
                events.append(
                    self.registry.certification_event(
                        token.token_id, official_description, certified_at, author or app.platform
                    )
                )
                events.append(
                    make_event(
                        EventKind.RECORD_LINKED,
                        {
                            "application_id": application_id,
                            "definition_id": app.definition_id,
                            "holder": token.holder,
                            "platform": app.platform,
                            "token_id": token.token_id,
                        },
                        author or app.platform,
                        certified_at,
                    )
                )
                certified.append(token.token_id)
            elif token.status is TokenStatus.CERTIFIED:
                skipped.append({"reason": "already certified", "token_id": token.token_id})
            elif token.status is TokenStatus.FROZEN:
                skipped.append({"reason": "frozen", "token_id": token.token_id})
            else:
                skipped.append({"reason": "revoked", "token_id": token.token_id})
        if events:
            self.ledger.commit(events, timestamp=certified_at)
        return {
            "application_id": application_id,
            "certified": certified,
            "definition_id": app.definition_id,
            "events_appended": len(events),
            "skipped": skipped,
        }

    def resubmit(
        self,
        application_id: str,
        platform: str,
        awarding_rules: str,
        sample_awards: Sequence[dict] = (),
        voting_data: str = "",
    ) -> CertificationApplication:
        app = self.get_application(application_id)
        if platform != app.platform:
            raise Unauthorized("only the applying platform may resubmit")
        state = self._advance(app, "resubmit")
        samples, voting_data = self._validate_payload(
            app.definition_id, platform, awarding_rules, sample_awards, voting_data
        )
        return self._store(
            replace(
                app,
                state=state,
                awarding_rules=awarding_rules,
                sample_awards=samples,
                voting_data=voting_data,
                revision=app.revision + 1,
                review=None,
                rejection_reason="",
                reviewer="",
            )
        )

    def withdraw(self, application_id: str, platform: str) -> CertificationApplication:
        app = self.get_application(application_id)
        if platform != app.platform:
            raise Unauthorized("only the applying platform may withdraw")
        state = self._advance(app, "withdraw")
        return self._store(replace(app, state=state))
