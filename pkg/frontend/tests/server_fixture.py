"""Boot a fully seeded node for the console's integration tests.

Prints a single MANIFEST line (JSON) describing every credential and id the
tests need, then serves the HTTP gateway until killed. All keys are small
(512-bit) and seeded so runs are fast and reproducible; nothing here is a
production configuration.

Usage: python3 server_fixture.py
"""

from __future__ import annotations

import json
import socket
import sys
import tempfile
from fractions import Fraction
from pathlib import Path

from medalchain.api import build_app
from medalchain.canon import canonical_hash
from medalchain.certification import ReviewRecord
from medalchain.config import NodeConfig
from medalchain.node import MedalNode
from medalchain.rsa import RsaKeyPair, keygen

AUTHORITY = "central-authority"
PLATFORM = "forge-academy"


def free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


def credential_wire(actor_id: str, key: RsaKeyPair) -> dict:
    return {
        "actor_id": actor_id,
        "modulus": format(key.n, "x"),
        "exponent": key.e,
        "secret": format(key.d, "x"),
    }


def sample(token_id: str, holder: str) -> dict:
    return {"holder": holder, "proof_ref": canonical_hash(token_id), "token_id": token_id}


def all_ok_review(reviewer: str, reviewed_at: int) -> ReviewRecord:
    return ReviewRecord(
        compliance_ok=True,
        design_ok=True,
        platform_ok=True,
        security_ok=True,
        notes={
            "compliance": "issuance log matches the published rules",
            "design": "metadata complete and legible",
            "platform": "platform in good standing",
            "security": "key handling reviewed",
        },
        reviewer=reviewer,
        reviewed_at=reviewed_at,
    )


def main() -> int:
    port = free_port()
    data_dir = Path(tempfile.mkdtemp(prefix="console-node-"))
    config = NodeConfig(
        difficulty=2,
        quorum=2,
        threshold=Fraction(1, 2),
        key_bits=512,
        host="127.0.0.1",
        port=port,
    )
    node, authority_key = MedalNode.create(
        data_dir, config, authority_id=AUTHORITY, key_seed=9001
    )

    platform_key = keygen(512, seed=9011)
    alice_key = keygen(512, seed=9021)
    bob_key = keygen(512, seed=9022)
    node.enroll(PLATFORM, "Platform", platform_key.public)
    node.enroll("alice", "User", alice_key.public)
    node.enroll("bob", "User", bob_key.public)

    trail = node.registry.register_definition(
        name="Trail Guide",
        icon=canonical_hash("trail guide icon"),
        description="Awarded for leading group hikes on marked trails.",
        criteria="Lead at least two logged group hikes with no safety reports.",
        grade_levels=["bronze", "silver"],
        issuer=PLATFORM,
    )
    reviewer_badge = node.registry.register_definition(
        name="Code Reviewer",
        icon=canonical_hash("code reviewer icon"),
        description="Recognises sustained, careful code review work.",
        criteria="One hundred reviews with a maintainer endorsement.",
        grade_levels=["bronze"],
        issuer=PLATFORM,
    )

    # Parity corpus: exactly 100 tokens, covering every status the wallet
    # can encounter (bulk PlatformIssued, a few Certified, one Frozen, one
    # Revoked) so client/server verification is compared across all of them.
    parity: list[str] = []
    for i in range(94):
        token = node.registry.mint_token(
            trail.definition_id, f"scout-{i:02d}", "bronze", PLATFORM
        )
        parity.append(token.token_id)

    certified_token = node.registry.mint_token(
        reviewer_badge.definition_id, "wallet-demo", "bronze", PLATFORM
    ).token_id
    revoked_token = node.registry.mint_token(
        trail.definition_id, "wallet-demo", "bronze", PLATFORM
    ).token_id
    plain_token = node.registry.mint_token(
        trail.definition_id, "wallet-demo", "silver", PLATFORM
    ).token_id
    bob_certified = node.registry.mint_token(
        reviewer_badge.definition_id, "bob", "bronze", PLATFORM
    ).token_id
    frozen_token = node.registry.mint_token(
        trail.definition_id, "frost-holder", "bronze", PLATFORM
    ).token_id
    alice_certified = node.registry.mint_token(
        reviewer_badge.definition_id, "alice", "bronze", PLATFORM
    ).token_id
    parity += [
        certified_token,
        revoked_token,
        plain_token,
        bob_certified,
        frozen_token,
        alice_certified,
    ]
    assert len(parity) == 100

    node.registry.freeze_token(frozen_token, author=AUTHORITY)
    node.registry.revoke_token(revoked_token, author=AUTHORITY)

    # Certify the Code Reviewer badge so its three tokens carry the
    # authority's stamp; the Trail Guide applications stay undecided for the
    # review-screen tests to work through live.
    certified_app = node.certification.submit_application(
        platform=PLATFORM,
        definition_id=reviewer_badge.definition_id,
        awarding_rules="Bronze after one hundred recorded reviews.",
        sample_awards=[sample(certified_token, "wallet-demo")],
        voting_data="",
    )
    node.certification.begin_review(certified_app.application_id, reviewer=AUTHORITY)
    node.certification.decide(
        certified_app.application_id,
        all_ok_review(AUTHORITY, node.now()),
        approve=True,
    )
    node.certification.certify(
        certified_app.application_id,
        official_description="Certified code review badge.",
        author=AUTHORITY,
    )

    queue_apps = []
    for rules in (
        "Bronze after two logged guided hikes.",
        "Silver after ten logged guided hikes in one season.",
        "Bronze may also be granted for trail maintenance days.",
    ):
        app = node.certification.submit_application(
            platform=PLATFORM,
            definition_id=trail.definition_id,
            awarding_rules=rules,
            sample_awards=[sample(parity[0], "scout-00")],
            voting_data="",
        )
        queue_apps.append(app.application_id)

    booth_round = node.voting.open_round(
        subject_hash=canonical_hash("console booth demo"),
        voters=["alice", "bob"],
        quorum=1,
        threshold=Fraction(1, 2),
        author=AUTHORITY,
    ).round_id
    closing_round = node.voting.open_round(
        subject_hash=canonical_hash("console booth close demo"),
        voters=["alice", "bob"],
        quorum=1,
        threshold=Fraction(1, 2),
        author=AUTHORITY,
    ).round_id

    manifest = {
        "base_url": f"http://127.0.0.1:{port}",
        "data_dir": str(data_dir),
        "authority": credential_wire(AUTHORITY, authority_key),
        "platform": credential_wire(PLATFORM, platform_key),
        "alice": credential_wire("alice", alice_key),
        "bob": credential_wire("bob", bob_key),
        "trail_definition": trail.definition_id,
        "reviewer_definition": reviewer_badge.definition_id,
        "queue_applications": queue_apps,
        "booth_round": booth_round,
        "closing_round": closing_round,
        "wallet_holder": "wallet-demo",
        "certified_token": certified_token,
        "revoked_token": revoked_token,
        "plain_token": plain_token,
        "frozen_token": frozen_token,
        "parity_tokens": parity,
    }
    print("MANIFEST " + json.dumps(manifest), flush=True)

    import uvicorn

    uvicorn.run(build_app(node), host="127.0.0.1", port=port, log_level="warning")
    return 0


if __name__ == "__main__":
    sys.exit(main())
