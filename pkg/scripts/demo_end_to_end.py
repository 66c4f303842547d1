"""Walk one badge through its whole life, narrating every step.

Covers: actor enrollment, definition registration, direct minting,
rule-contract auto-issuance, an anonymous governance vote that raises the
rule's bar, the certification application workflow, and final third-party
verification against the chain.

Run:  python3 scripts/demo_end_to_end.py [--data-dir DIR] [--difficulty N]
"""

from __future__ import annotations

import argparse
import random
import sys
import tempfile
from fractions import Fraction
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from medalchain.canon import canonical_hash
from medalchain.certification import ReviewRecord
from medalchain.config import NodeConfig
from medalchain.contracts import conditions_from_wire, rule_subject_hash
from medalchain.credentials import Role
from medalchain.errors import MedalChainError
from medalchain.node import MedalNode
from medalchain.rsa import blind, fdh, keygen, new_blinding_factor, new_serial, unblind


def say(step: str, detail: str = "") -> None:
    print(f"==> {step}")
    if detail:
        for line in detail.splitlines():
            print(f"    {line}")


def cast_anonymous_vote(node, round_id: str, voter: str, option: str, rng) -> None:
    """The voter's side of the booth: blind, get signed, unblind, cast."""
    rnd = node.voting.get_round(round_id)
    pub = rnd.public_key
    serial = new_serial(rng)
    r = new_blinding_factor(pub.n, rng)
    digest = fdh(round_id, serial, pub.n)
    signed_blind = node.voting.request_ballot(round_id, voter, blind(digest, r, pub))
    node.voting.cast_vote(round_id, serial, option, unblind(signed_blind, r, pub))


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--data-dir", default=None, help="defaults to a fresh temp dir")
    parser.add_argument("--difficulty", type=int, default=8)
    args = parser.parse_args()

    data_dir = Path(args.data_dir) if args.data_dir else Path(tempfile.mkdtemp(prefix="medal-"))
    config = NodeConfig(
        difficulty=args.difficulty, quorum=2, threshold=Fraction(1, 2), key_bits=512
    )
    node, authority_key = MedalNode.create(data_dir, config=config, key_seed=2024)
    say(
        "Node initialised",
        f"data dir   {data_dir}\n"
        f"difficulty {config.difficulty} leading zero bits\n"
        f"authority  central-authority (keys in authority_key.json)",
    )

    rng = random.Random(42)
    platform_key = keygen(512, seed=1)
    node.enroll("forge-academy", Role.PLATFORM, platform_key.public)
    for name in ("alice", "bob", "carol"):
        node.enroll(name, Role.USER, keygen(512, seed=hash(name) % 10_000).public)
    say("Actors enrolled", "platform forge-academy; users alice, bob, carol")

    definition = node.registry.register_definition(
        name="Trail Guide",
        icon=canonical_hash("trail-guide-icon-v1"),
        description="Recognises members who lead group hikes safely.",
        criteria="Lead documented group hikes; no incidents on record.",
        grade_levels=["bronze", "silver"],
        issuer="forge-academy",
    )
    say("Badge defined", f"{definition.name} ({definition.definition_id[:16]}…) grades: bronze, silver")

    minted = node.registry.mint_token(definition.definition_id, "alice", "silver", "forge-academy")
    say(
        "Token minted directly",
        f"silver Trail Guide -> alice\ntoken {minted.token_id[:16]}…  status {minted.status.value}",
    )

    contract = node.contracts.create_contract(
        definition.definition_id,
        "bronze",
        [{"action": "hike_led", "min_count": 2}],
        author="forge-academy",
    )
    say("Issuance contract attached", "bronze Trail Guide auto-awards after 2 hike_led activities")

    for _ in range(2):
        node.contracts.ingest_activity("bob", "hike_led", "forge-academy", node.ledger.now())
    earned = node.contracts.execute_issuance(contract.contract_id, "bob")
    say("Contract fired", f"bob logged 2 hikes -> bronze token {earned.token_id[:16]}…")

    new_conditions = [{"action": "hike_led", "min_count": 3}]
    subject = rule_subject_hash(contract.contract_id, 1, conditions_from_wire(new_conditions))
    rnd = node.voting.open_round(
        subject_hash=subject,
        voters=["alice", "bob", "carol"],
        quorum=2,
        threshold=Fraction(1, 2),
        author="central-authority",
    )
    for voter, option in (("alice", "approve"), ("bob", "approve"), ("carol", "reject")):
        cast_anonymous_vote(node, rnd.round_id, voter, option, rng)
    tally = node.voting.close_round(rnd.round_id, author="central-authority")
    say(
        "Governance round closed",
        f"raise hike requirement to 3: {dict(tally.counts)} -> "
        f"{'PASSES' if tally.passing else 'fails'} (anonymous ballots, serial nullifiers)",
    )
    if tally.passing:
        node.contracts.update_rules(
            contract.contract_id, new_conditions, tally, author="forge-academy"
        )
        say("Rules updated", "contract now requires 3 hikes (version 2)")

    application = node.certification.submit_application(
        platform="forge-academy",
        definition_id=definition.definition_id,
        awarding_rules="Bronze after 3 verified hike_led activities; silver by committee.",
        sample_awards=[
            {
                "holder": earned.holder,
                "proof_ref": canonical_hash(earned.token_id),
                "token_id": earned.token_id,
            }
        ],
        voting_data=tally.digest(),
    )
    node.certification.begin_review(application.application_id, reviewer="central-authority")
    review = ReviewRecord(
        compliance_ok=True,
        design_ok=True,
        platform_ok=True,
        security_ok=True,
        notes={
            "compliance": "criteria match the published standard",
            "design": "metadata complete",
            "platform": "issuer in good standing",
            "security": "issuance path audited",
        },
        reviewer="central-authority",
        reviewed_at=node.ledger.now(),
    )
    node.certification.decide(application.application_id, review, approve=True)
    result = node.certification.certify(
        application.application_id,
        official_description="Nationally recognised hiking guide credential.",
        author="central-authority",
    )
    say(
        "Certification granted",
        f"{len(result['certified'])} platform token(s) upgraded, "
        f"{result['events_appended']} events appended in one block",
    )

    for token_id in (minted.token_id, earned.token_id):
        report = node.registry.verify_token(token_id)
        say(
            f"Verify {token_id[:16]}…",
            f"holder {report['holder']}  status {report['status']}  "
            f"certified {report['certified']}  proofs_ok {report['proofs_ok']} "
            f"({len(report['inclusion_proofs'])} chain events)",
        )

    tip = node.chain_tip()
    say(
        "Chain summary",
        f"height {tip['height']}  total work {tip['total_work']}\ntip {tip['tip_hash']}",
    )

    reopened = MedalNode.open(data_dir)
    match = reopened.state_digest() == node.state_digest()
    say("Crash-replay check", f"reopened node digest matches: {match}")
    return 0 if match else 1


if __name__ == "__main__":
    try:
        sys.exit(main())
    except MedalChainError as exc:
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        sys.exit(1)
