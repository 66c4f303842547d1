"""Event identity and wire-form validation."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from medalchain.canon import canonical_encode, sha256_hex
from medalchain.errors import SchemaViolation
from medalchain.events import (
    EventKind,
    event_from_wire,
    make_event,
    payload_references,
    recompute_event_id,
)


def test_event_id_is_hash_of_canonical_content():
    event = make_event(
        EventKind.TOKEN_MINTED,
        {"token_id": "ab" * 32, "holder": "carol"},
        author="platform-1",
        timestamp=42,
    )
    expected = sha256_hex(
        canonical_encode(
            [
                "TokenMinted",
                {"holder": "carol", "token_id": "ab" * 32},
                "platform-1",
                42,
            ]
        )
    )
    assert event.event_id == expected
    assert recompute_event_id(event) == event.event_id


def test_event_id_depends_on_every_field():
    base = make_event(EventKind.TOKEN_MINTED, {"a": 1}, "author", 1)
    variants = [
        make_event(EventKind.TOKEN_FROZEN, {"a": 1}, "author", 1),
        make_event(EventKind.TOKEN_MINTED, {"a": 2}, "author", 1),
        make_event(EventKind.TOKEN_MINTED, {"a": 1}, "other", 1),
        make_event(EventKind.TOKEN_MINTED, {"a": 1}, "author", 2),
    ]
    assert len({base.event_id, *[v.event_id for v in variants]}) == 5


def test_wire_round_trip():
    event = make_event(EventKind.RULE_UPDATED, {"contract_id": "x", "new_version": 2}, "auth", 7)
    assert event_from_wire(event.to_wire()) == event


def test_wire_rejects_missing_and_extra_keys():
    event = make_event(EventKind.VOTE_CAST, {"round_id": "r"}, "anon", 3)
    wire = event.to_wire()
    missing = {k: v for k, v in wire.items() if k != "author"}
    with pytest.raises(SchemaViolation):
        event_from_wire(missing)
    extra = dict(wire, debug=True)
    with pytest.raises(SchemaViolation):
        event_from_wire(extra)


def test_wire_rejects_unknown_kind():
    wire = make_event(EventKind.VOTE_CAST, {}, "anon", 3).to_wire()
    wire["kind"] = "TokenTeleported"
    with pytest.raises(SchemaViolation):
        event_from_wire(wire)


def test_wire_rejects_malformed_fields():
    wire = make_event(EventKind.VOTE_CAST, {}, "anon", 3).to_wire()
    for key, bad in [
        ("event_id", "zz" * 32),
        ("event_id", "ab" * 31),
        ("timestamp", -1),
        ("timestamp", True),
        ("payload", ["not", "a", "map"]),
        ("author", 9),
    ]:
        broken = dict(wire, **{key: bad})
        with pytest.raises(SchemaViolation):
            event_from_wire(broken)


@given(
    st.sampled_from(list(EventKind)),
    st.dictionaries(st.text(max_size=8), st.one_of(st.integers(), st.text(max_size=8)), max_size=4),
    st.text(min_size=1, max_size=12),
    st.integers(min_value=0, max_value=2**40),
)
def test_round_trip_property(kind, payload, author, timestamp):
    event = make_event(kind, payload, author, timestamp)
    assert event_from_wire(event.to_wire()) == event
    assert recompute_event_id(event) == event.event_id


class TestPayloadReferences:
    def test_top_level_value(self):
        assert payload_references({"token_id": "t-1"}, "t-1")

    def test_nested_in_list_and_map(self):
        payload = {"linked": [{"holder": "alice"}, {"holder": "bob"}]}
        assert payload_references(payload, "bob")
        assert not payload_references(payload, "carol")

    def test_keys_do_not_count(self):
        assert not payload_references({"alice": 1}, "alice")

    def test_no_substring_matching(self):
        assert not payload_references({"holder": "alice-smith"}, "alice")
