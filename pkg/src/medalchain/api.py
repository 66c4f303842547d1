"""HTTP gateway: every node capability behind a /v1 JSON interface.

Reads are public. Mutations must carry an ``X-Actor-Id`` header naming an
enrolled credential and an ``X-Signature`` header holding a hex RSA signature
over ``METHOD\\npath\\nbody``, so a request cannot be forged, replayed against
a different endpoint, or re-pointed at a different payload. The single
exception is casting a ballot, which is deliberately anonymous: the blind
signature inside the ballot is its whole authorisation.

Every response — success or error — carries ``X-Chain-Tip`` and
``X-Chain-Height`` headers so clients can watch the replicated state advance.
"""

from __future__ import annotations

import json
from typing import Optional

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .certification import ApplicationState, ReviewRecord
from .errors import MedalChainError, SchemaViolation, Unauthorized
from .node import MedalNode
from .rsa import RsaPublicKey

ACTOR_HEADER = "x-actor-id"
SIGNATURE_HEADER = "x-signature"


def _parse_json(body: bytes) -> dict:
    if not body:
        return {}
    try:
        payload = json.loads(body.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SchemaViolation(f"request body is not valid JSON: {exc}")
    if not isinstance(payload, dict):
        raise SchemaViolation("request body must be a JSON object")
    return payload


def _field(payload: dict, key: str, kind: type, default=...):
    value = payload.get(key, default)
    if value is ...:
        raise SchemaViolation(f"missing required field {key!r}")
    if kind is int and isinstance(value, bool) or not isinstance(value, kind):
        raise SchemaViolation(f"field {key!r} must be of type {kind.__name__}")
    return value


def _hex_field(payload: dict, key: str) -> int:
    raw = _field(payload, key, str)
    try:
        return int(raw, 16)
    except ValueError:
        raise SchemaViolation(f"field {key!r} must be a hex string")


def build_app(node: MedalNode) -> FastAPI:
    app = FastAPI(title="medalchain node", docs_url=None, redoc_url=None)

    # The browser console runs on a different origin than the node. Signatures,
    # not origins, are what authenticate mutations, so a permissive CORS policy
    # gives away nothing.
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["GET", "POST"],
        allow_headers=[ACTOR_HEADER, SIGNATURE_HEADER, "content-type"],
        expose_headers=["X-Chain-Tip", "X-Chain-Height"],
    )

    # -- cross-cutting ---------------------------------------------------------

    def _stamp(response: Response) -> Response:
        response.headers["X-Chain-Tip"] = node.ledger.tip_hash
        response.headers["X-Chain-Height"] = str(node.ledger.height)
        return response

    @app.middleware("http")
    async def chain_tip_headers(request: Request, call_next):
        return _stamp(await call_next(request))

    @app.exception_handler(MedalChainError)
    async def domain_error(request: Request, exc: MedalChainError):
        return JSONResponse(
            status_code=exc.status, content={"error": exc.code, "message": str(exc)}
        )

    async def authenticated(request: Request, operation: str) -> tuple[str, dict]:
        body = await request.body()
        actor_id = request.headers.get(ACTOR_HEADER)
        signature = request.headers.get(SIGNATURE_HEADER)
        if not actor_id or not signature:
            raise Unauthorized("mutations require X-Actor-Id and X-Signature headers")
        node.credentials.authenticate(
            actor_id, request.method, request.url.path, body, signature
        )
        node.authorize(actor_id, operation)
        return actor_id, _parse_json(body)

    # -- chain reads -------------------------------------------------------------

    @app.get("/v1/chain/tip")
    def chain_tip():
        return node.chain_tip()

    @app.get("/v1/chain")
    def chain_export():
        return {"blocks": node.export_chain()}

    @app.get("/v1/chain/blocks/{height}")
    def chain_block(height: int):
        blocks = node.ledger.blocks
        if not 0 <= height < len(blocks):
            raise SchemaViolation(f"no block at height {height}")
        return blocks[height].to_wire()

    # -- badge reads ---------------------------------------------------------------

    @app.get("/v1/definitions")
    def definitions():
        return {"definitions": [d.to_wire() for d in node.registry.definitions.values()]}

    @app.get("/v1/definitions/{definition_id}")
    def definition(definition_id: str):
        wire = node.registry.get_definition(definition_id).to_wire()
        wire["tokens"] = [t.to_wire() for t in node.registry.tokens_of_definition(definition_id)]
        return wire

    @app.get("/v1/tokens/{token_id}")
    def token(token_id: str):
        return node.registry.get_token(token_id).to_wire()

    @app.get("/v1/tokens/{token_id}/verify")
    def verify(token_id: str):
        return node.registry.verify_token(token_id)

    @app.get("/v1/holders/{holder}/tokens")
    def holder_tokens(holder: str):
        return {"tokens": [t.to_wire() for t in node.registry.tokens_of_holder(holder)]}

    # -- governance / voting reads ---------------------------------------------------

    @app.get("/v1/contracts/{contract_id}")
    def contract(contract_id: str):
        return node.contracts.get_contract(contract_id).to_wire()

    @app.get("/v1/rounds/{round_id}")
    def voting_round(round_id: str):
        rnd = node.voting.get_round(round_id)
        tally = node.voting.get_tally(round_id)
        wire = rnd.to_wire()
        wire["tally"] = tally.to_wire() if tally is not None else None
        return wire

    @app.get("/v1/users/{user}/activity")
    def activity(user: str):
        return {"activity": [a.to_wire() for a in node.contracts.user_log(user)]}

    # -- certification reads ----------------------------------------------------------

    @app.get("/v1/applications")
    def applications(state: Optional[str] = None):
        parsed = None
        if state is not None:
            try:
                parsed = ApplicationState(state)
            except ValueError:
                raise SchemaViolation(f"unknown application state {state!r}")
        return {
            "applications": [a.to_wire() for a in node.certification.list_applications(parsed)]
        }

    @app.get("/v1/applications/{application_id}")
    def application(application_id: str):
        return node.certification.get_application(application_id).to_wire()

    @app.get("/v1/actors")
    def actors():
        return {"actors": [c.to_wire() for c in node.credentials.actors()]}

    # -- identity mutations ---------------------------------------------------------

    @app.post("/v1/actors", status_code=201)
    async def enroll(request: Request):
        _, payload = await authenticated(request, "enroll")
        credential = node.enroll(
            _field(payload, "actor_id", str),
            _field(payload, "role", str),
            RsaPublicKey.from_wire(_field(payload, "public_key", dict)),
        )
        return credential.to_wire()

    # -- badge mutations --------------------------------------------------------------

    @app.post("/v1/definitions", status_code=201)
    async def define(request: Request):
        actor, payload = await authenticated(request, "define")
        definition = node.registry.register_definition(
            name=_field(payload, "name", str),
            icon=_field(payload, "icon", str),
            description=_field(payload, "description", str),
            criteria=_field(payload, "criteria", str),
            grade_levels=_field(payload, "grade_levels", list),
            issuer=actor,
        )
        return definition.to_wire()

    @app.post("/v1/tokens", status_code=201)
    async def mint(request: Request):
        actor, payload = await authenticated(request, "mint")
        token = node.registry.mint_token(
            _field(payload, "definition_id", str),
            _field(payload, "holder", str),
            _field(payload, "grade", str),
            issuer=actor,
        )
        return token.to_wire()

    def _status_change(operation):
        async def handler(request: Request, token_id: str):
            actor, _ = await authenticated(request, operation)
            method = getattr(node.registry, f"{operation}_token")
            return method(token_id, author=actor).to_wire()

        return handler

    app.post("/v1/tokens/{token_id}/freeze")(_status_change("freeze"))
    app.post("/v1/tokens/{token_id}/revoke")(_status_change("revoke"))
    app.post("/v1/tokens/{token_id}/restore")(_status_change("restore"))

    # -- rule contracts ------------------------------------------------------------------

    @app.post("/v1/contracts", status_code=201)
    async def create_contract(request: Request):
        actor, payload = await authenticated(request, "create_contract")
        contract = node.contracts.create_contract(
            _field(payload, "definition_id", str),
            _field(payload, "grade", str),
            _field(payload, "conditions", list),
            author=actor,
        )
        return contract.to_wire()

    @app.post("/v1/contracts/{contract_id}/rules")
    async def update_rules(request: Request, contract_id: str):
        actor, payload = await authenticated(request, "update_rules")
        round_id = _field(payload, "round_id", str)
        node.voting.get_round(round_id)
        tally = node.voting.get_tally(round_id)
        if tally is None:
            raise SchemaViolation(f"round {round_id} has not been closed and tallied")
        contract = node.contracts.update_rules(
            contract_id,
            _field(payload, "conditions", list),
            tally,
            base_version=payload.get("base_version"),
            author=actor,
        )
        return contract.to_wire()

    @app.post("/v1/activity", status_code=201)
    async def ingest_activity(request: Request):
        actor, payload = await authenticated(request, "activity")
        entry = node.contracts.ingest_activity(
            user=_field(payload, "user", str),
            action=_field(payload, "action", str),
            platform=actor,
            occurred_at=_field(payload, "occurred_at", int),
            attributes=payload.get("attributes") or {},
        )
        return entry.to_wire()

    @app.post("/v1/contracts/{contract_id}/execute", status_code=201)
    async def execute(request: Request, contract_id: str):
        actor, payload = await authenticated(request, "execute")
        user = _field(payload, "user", str)
        credential = node.credentials.get(actor)
        if credential.role.value == "User" and user != actor:
            raise Unauthorized("users may only claim rule issuance for themselves")
        return node.contracts.execute_issuance(contract_id, user).to_wire()

    # -- voting ---------------------------------------------------------------------------

    @app.post("/v1/rounds", status_code=201)
    async def open_round(request: Request):
        actor, payload = await authenticated(request, "open_round")
        rnd = node.voting.open_round(
            subject_hash=_field(payload, "subject_hash", str),
            voters=_field(payload, "voters", list),
            options=tuple(payload.get("options") or ("approve", "reject")),
            quorum=payload.get("quorum", node.config.quorum),
            threshold=payload.get("threshold", node.config.threshold),
            author=actor,
        )
        return rnd.to_wire()

    @app.post("/v1/rounds/{round_id}/ballots", status_code=201)
    async def request_ballot(request: Request, round_id: str):
        actor, payload = await authenticated(request, "request_ballot")
        signed = node.voting.request_ballot(round_id, actor, _hex_field(payload, "blinded"))
        return {"round_id": round_id, "signed_blind": format(signed, "x"), "voter": actor}

    @app.post("/v1/rounds/{round_id}/votes", status_code=201)
    async def cast_vote(request: Request, round_id: str):
        # Anonymous on purpose: no actor header, no signature header. The
        # unlinkable blind signature carried in the body is the authorisation.
        payload = _parse_json(await request.body())
        serial_hex = _field(payload, "serial", str)
        try:
            serial = bytes.fromhex(serial_hex)
        except ValueError:
            raise SchemaViolation("serial must be a hex string")
        return node.voting.cast_vote(
            round_id,
            serial,
            _field(payload, "option", str),
            _hex_field(payload, "signature"),
        )

    @app.post("/v1/rounds/{round_id}/close")
    async def close_round(request: Request, round_id: str):
        actor, _ = await authenticated(request, "close_round")
        return node.voting.close_round(round_id, author=actor).to_wire()

    # -- certification workflow --------------------------------------------------------------

    @app.post("/v1/applications", status_code=201)
    async def submit_application(request: Request):
        actor, payload = await authenticated(request, "submit_application")
        app_record = node.certification.submit_application(
            platform=actor,
            definition_id=_field(payload, "definition_id", str),
            awarding_rules=_field(payload, "awarding_rules", str),
            sample_awards=payload.get("sample_awards") or [],
            voting_data=payload.get("voting_data") or "",
        )
        return app_record.to_wire()

    @app.post("/v1/applications/{application_id}/review")
    async def begin_review(request: Request, application_id: str):
        actor, _ = await authenticated(request, "begin_review")
        return node.certification.begin_review(application_id, reviewer=actor).to_wire()

    @app.post("/v1/applications/{application_id}/decision")
    async def decide(request: Request, application_id: str):
        actor, payload = await authenticated(request, "decide")
        review_wire = dict(_field(payload, "review", dict))
        review_wire.setdefault("reviewer", actor)
        review_wire.setdefault("reviewed_at", node.now())
        try:
            review = ReviewRecord.from_wire(review_wire)
        except (KeyError, TypeError) as exc:
            raise SchemaViolation(f"malformed review record: {exc}")
        record = node.certification.decide(
            application_id,
            review,
            approve=_field(payload, "approve", bool),
            rejection_reason=payload.get("rejection_reason") or "",
        )
        return record.to_wire()

    @app.post("/v1/applications/{application_id}/certify")
    async def certify(request: Request, application_id: str):
        actor, payload = await authenticated(request, "certify")
        return node.certification.certify(
            application_id,
            official_description=payload.get("official_description") or "",
            author=actor,
        )

    @app.post("/v1/applications/{application_id}/resubmit")
    async def resubmit(request: Request, application_id: str):
        actor, payload = await authenticated(request, "resubmit")
        record = node.certification.resubmit(
            application_id,
            platform=actor,
            awarding_rules=_field(payload, "awarding_rules", str),
            sample_awards=payload.get("sample_awards") or [],
            voting_data=payload.get("voting_data") or "",
        )
        return record.to_wire()

    @app.post("/v1/applications/{application_id}/withdraw")
    async def withdraw(request: Request, application_id: str):
        actor, _ = await authenticated(request, "withdraw")
        return node.certification.withdraw(application_id, platform=actor).to_wire()

    return app
