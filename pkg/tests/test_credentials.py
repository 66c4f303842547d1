"""Actor credentials, role checks, and request signatures."""

from __future__ import annotations

import pytest

from medalchain.credentials import (
    Credential,
    CredentialStore,
    Role,
    new_credential,
    request_digest,
    sign_request,
    signing_payload,
    verify_request,
)
from medalchain.errors import SchemaViolation, Unauthorized, UnknownActor
from medalchain.rsa import keygen

AUTH_KEY = keygen(64, seed=11)
PLAT_KEY = keygen(64, seed=12)
USER_KEY = keygen(64, seed=13)


@pytest.fixture
def store():
    s = CredentialStore()
    s.add(new_credential("central-authority", Role.AUTHORITY, AUTH_KEY, 1000))
    s.add(new_credential("forge-academy", Role.PLATFORM, PLAT_KEY, 1001))
    s.add(new_credential("alice", Role.USER, USER_KEY, 1002))
    return s


class TestStore:
    def test_lookup_round_trip(self, store):
        assert store.get("alice").role is Role.USER
        assert store.authority.actor_id == "central-authority"
        assert len(store) == 3 and "forge-academy" in store

    def test_unknown_actor_raises_401(self, store):
        with pytest.raises(UnknownActor) as err:
            store.get("mallory")
        assert err.value.status == 401

    def test_exactly_one_authority(self, store):
        rival = new_credential("rival-authority", Role.AUTHORITY, keygen(64, seed=14), 2000)
        with pytest.raises(SchemaViolation):
            store.add(rival)

    def test_missing_authority_raises(self):
        with pytest.raises(UnknownActor):
            CredentialStore().authority

    def test_duplicate_actor_rejected(self, store):
        with pytest.raises(SchemaViolation):
            store.add(new_credential("alice", Role.USER, USER_KEY, 9))

    def test_actors_listing_is_sorted(self, store):
        assert [c.actor_id for c in store.actors()] == [
            "alice",
            "central-authority",
            "forge-academy",
        ]

    def test_require_role_admits_and_refuses(self, store):
        assert store.require_role("forge-academy", Role.PLATFORM).actor_id == "forge-academy"
        assert store.require_role("alice", Role.PLATFORM, Role.USER).role is Role.USER
        with pytest.raises(Unauthorized) as err:
            store.require_role("alice", Role.AUTHORITY)
        assert err.value.status == 401


class TestWire:
    def test_credential_round_trip(self):
        credential = new_credential("bob", Role.USER, USER_KEY, 77)
        assert Credential.from_wire(credential.to_wire()) == credential

    @pytest.mark.parametrize(
        "mangle",
        [
            lambda w: w.pop("role"),
            lambda w: w.update(role="Admin"),
            lambda w: w.update(actor_id=""),
            lambda w: w.update(issued_at=-1),
            lambda w: w.update(issued_at=True),
            lambda w: w.update(extra=1),
        ],
    )
    def test_malformed_wire_rejected(self, mangle):
        wire = new_credential("bob", Role.USER, USER_KEY, 77).to_wire()
        mangle(wire)
        with pytest.raises(SchemaViolation):
            Credential.from_wire(wire)


class TestRequestSignatures:
    METHOD, PATH, BODY = "POST", "/v1/tokens", b'{"holder":"alice"}'

    def test_sign_verify_round_trip(self):
        signature = sign_request(PLAT_KEY, self.METHOD, self.PATH, self.BODY)
        assert verify_request(PLAT_KEY.public, self.METHOD, self.PATH, self.BODY, signature)

    def test_payload_binds_method_path_and_body(self):
        signature = sign_request(PLAT_KEY, self.METHOD, self.PATH, self.BODY)
        assert not verify_request(PLAT_KEY.public, "PUT", self.PATH, self.BODY, signature)
        assert not verify_request(PLAT_KEY.public, self.METHOD, "/v1/other", self.BODY, signature)
        assert not verify_request(PLAT_KEY.public, self.METHOD, self.PATH, b"{}", signature)

    def test_wrong_key_fails(self):
        signature = sign_request(PLAT_KEY, self.METHOD, self.PATH, self.BODY)
        assert not verify_request(USER_KEY.public, self.METHOD, self.PATH, self.BODY, signature)

    def test_garbage_signature_fails_closed(self):
        for junk in ("", "zz", "-5", str(PLAT_KEY.n), None):
            assert not verify_request(PLAT_KEY.public, self.METHOD, self.PATH, self.BODY, junk)

    def test_signing_payload_layout(self):
        assert signing_payload("post", "/v1/x", b"body") == b"POST\n/v1/x\nbody"

    def test_digest_reduces_into_modulus_and_avoids_zero(self):
        digest = request_digest(self.METHOD, self.PATH, self.BODY, PLAT_KEY.n)
        assert 1 <= digest < PLAT_KEY.n

    def test_store_authenticate(self, store):
        signature = sign_request(PLAT_KEY, self.METHOD, self.PATH, self.BODY)
        credential = store.authenticate(
            "forge-academy", self.METHOD, self.PATH, self.BODY, signature
        )
        assert credential.role is Role.PLATFORM
        with pytest.raises(Unauthorized):
            store.authenticate("forge-academy", self.METHOD, self.PATH, b"tampered", signature)
        with pytest.raises(UnknownActor):
            store.authenticate("ghost", self.METHOD, self.PATH, self.BODY, signature)
