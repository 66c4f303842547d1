"""Shared test utilities: client-side ballot protocol and a standard workload."""

from __future__ import annotations

import random

from medalchain.credentials import Role
from medalchain.rsa import blind, fdh, keygen, new_blinding_factor, new_serial, unblind

TEST_KEY_BITS = 64

PLATFORM_KEY = keygen(TEST_KEY_BITS, seed=201)
USER_KEYS = {name: keygen(TEST_KEY_BITS, seed=300 + i) for i, name in enumerate(
    ["alice", "bob", "carol", "dave", "erin", "frank"]
)}


def vote_in_round(voting, round_id: str, voter: str, option: str, seed: int = 0) -> dict:
    """The voter's full anonymous path: blind, get signed, unblind, cast."""
    rnd = voting.get_round(round_id)
    rng = random.Random((seed << 20) ^ (sum(map(ord, voter)) << 4))
    serial = new_serial(rng)
    pub = rnd.public_key
    r = new_blinding_factor(pub.n, rng)
    m = fdh(round_id, serial, pub.n)
    signed_blind = voting.request_ballot(round_id, voter, blind(m, r, pub))
    return voting.cast_vote(round_id, serial, option, unblind(signed_blind, r, pub))


def enroll_cast(node, seed_users=("alice", "bob", "carol")) -> None:
    """Enroll the standard platform and user credentials on a fresh node."""
    node.enroll("forge-academy", Role.PLATFORM, PLATFORM_KEY.public)
    for name in seed_users:
        node.enroll(name, Role.USER, USER_KEYS[name].public)
