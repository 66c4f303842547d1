"""Anonymous approval voting gated by blind-signed ballot tokens.

The registrar signs blinded ballot digests for eligible voters, learning
neither the serial nor the final signature. Cast votes land on the ledger as
(serial, option) pairs with no voter identity; the issuance log holds voter
identities with no serials. Double votes die on the serial nullifier.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .canon import canonical_hash
from .chain import Block, Ledger
from .errors import (
    AlreadyIssued,
    DuplicateSerial,
    InvalidSignature,
    MessageOutOfRange,
    NotEligible,
    RoundClosed,
    SchemaViolation,
    UnknownOption,
    UnknownRound,
)
from .events import EventKind, make_event
from .rsa import (
    DEFAULT_KEY_BITS,
    RsaKeyPair,
    RsaPublicKey,
    fdh,
    keygen,
    sign_blinded,
    verify_signature,
)

APPROVE_OPTION = "approve"
DEFAULT_QUORUM = 10
DEFAULT_THRESHOLD = Fraction(3, 5)

#: Field names of the registrar's issuance record. Kept next to the ledger
#: ballot schema so the no-joinable-identity property is checkable.
ISSUANCE_RECORD_FIELDS = frozenset({"round_id", "voter"})
BALLOT_EVENT_FIELDS = frozenset({"option", "round_id", "serial"})


@dataclass(frozen=True)
class TallyResult:
    round_id: str
    subject_hash: str
    counts: dict[str, int]
    total: int
    passing: bool
    quorum: int
    threshold: Fraction

    def to_wire(self) -> dict:
        return {
            "counts": dict(self.counts),
            "passing": self.passing,
            "quorum": self.quorum,
            "round_id": self.round_id,
            "subject_hash": self.subject_hash,
            "threshold_den": self.threshold.denominator,
            "threshold_num": self.threshold.numerator,
            "total": self.total,
        }

    def digest(self) -> str:
        return canonical_hash(self.to_wire())


def decide_passing(counts: dict[str, int], quorum: int, threshold: Fraction) -> tuple[int, bool]:
    """Integer-exact pass rule: quorum met and approve share >= threshold."""
    total = sum(counts.values())
    approvals = counts.get(APPROVE_OPTION, 0)
    passing = total >= quorum and approvals * threshold.denominator >= threshold.numerator * total
    return total, passing


@dataclass
class VotingRound:
    round_id: str
    subject_hash: str
    options: tuple[str, ...]
    public_key: RsaPublicKey
    quorum: int
    threshold: Fraction
    open: bool = True
    eligible_voters: frozenset[str] = frozenset()
    used_serials: set[str] = field(default_factory=set)
    counts: dict[str, int] = field(default_factory=dict)

    def to_wire(self) -> dict:
        return {
            "counts": dict(self.counts),
            "open": self.open,
            "options": list(self.options),
            "public_key": self.public_key.to_wire(),
            "quorum": self.quorum,
            "round_id": self.round_id,
            "subject_hash": self.subject_hash,
            "threshold_den": self.threshold.denominator,
            "threshold_num": self.threshold.numerator,
            "total_cast": sum(self.counts.values()),
        }


class VotingService:
    """Round lifecycle + registrar duties, folding ballot events off the chain.

    Eligibility lists and registrar keys never touch the ledger; the node
    persists them through the `on_open` / `on_issue` hooks instead.
    """

    def __init__(self, ledger: Ledger, key_bits: int = DEFAULT_KEY_BITS):
        self.ledger = ledger
        self.key_bits = key_bits
        self.rounds: dict[str, VotingRound] = {}
        self.keys: dict[str, RsaKeyPair] = {}
        self.issued: dict[str, set[str]] = {}
        self.tallies: dict[str, TallyResult] = {}
        self.on_open: list[Callable[[VotingRound, RsaKeyPair], None]] = []
        self.on_issue: list[Callable[[str, str], None]] = []
        self._seq = 0
        ledger.on_commit.append(self.fold_block)

    # -- fold -----------------------------------------------------------------

    def fold_block(self, block: Block) -> None:
        for event in block.events:
            p = event.payload
            if event.kind is EventKind.VOTE_ROUND_OPENED:
                self.rounds[p["round_id"]] = VotingRound(
                    round_id=p["round_id"],
                    subject_hash=p["subject_hash"],
                    options=tuple(p["options"]),
                    public_key=RsaPublicKey(n=int(p["modulus"], 16), e=p["exponent"]),
                    quorum=p["quorum"],
                    threshold=Fraction(p["threshold_num"], p["threshold_den"]),
                )
                self._seq += 1
            elif event.kind is EventKind.VOTE_CAST:
                rnd = self.rounds[p["round_id"]]
                rnd.used_serials.add(p["serial"])
                rnd.counts[p["option"]] = rnd.counts.get(p["option"], 0) + 1
            elif event.kind is EventKind.VOTE_ROUND_CLOSED:
                rnd = self.rounds[p["round_id"]]
                rnd.open = False
                self.tallies[p["round_id"]] = TallyResult(
                    round_id=p["round_id"],
                    subject_hash=p["subject_hash"],
                    counts=dict(p["counts"]),
                    total=p["total"],
                    passing=p["passing"],
                    quorum=p["quorum"],
                    threshold=Fraction(p["threshold_num"], p["threshold_den"]),
                )

    # -- reads ------------------------------------------------------------------

    def get_round(self, round_id: str) -> VotingRound:
        rnd = self.rounds.get(round_id)
        if rnd is None:
            raise UnknownRound(f"no round {round_id}")
        return rnd

    def get_tally(self, round_id: str) -> Optional[TallyResult]:
        self.get_round(round_id)
        return self.tallies.get(round_id)

    def snapshot(self) -> dict:
        return {
            "issued": {r: sorted(v) for r, v in self.issued.items()},
            "rounds": {r: v.to_wire() for r, v in self.rounds.items()},
            "used_serials": {r: sorted(v.used_serials) for r, v in self.rounds.items()},
        }

    # -- registrar / lifecycle ----------------------------------------------------

    def open_round(
        self,
        *,
        subject_hash: str,
        voters: Sequence[str],
        options: Sequence[str] = (APPROVE_OPTION, "reject"),
        quorum: Optional[int] = None,
        threshold: Optional[Fraction] = None,
        author: str,
        key: Optional[RsaKeyPair] = None,
    ) -> VotingRound:
        quorum = DEFAULT_QUORUM if quorum is None else quorum
        if threshold is None:
            threshold = DEFAULT_THRESHOLD
        else:
            # Via str so a decimal like 0.6 means the exact rational 3/5,
            # not its binary-float expansion.
            threshold = Fraction(str(threshold))
        options = tuple(options)
        voter_set = frozenset(voters)
        if len(options) < 2 or len(set(options)) != len(options):
            raise SchemaViolation("options must be at least two distinct strings")
        if not all(isinstance(o, str) and o for o in options):
            raise SchemaViolation("options must be non-empty strings")
        if not voter_set or not all(isinstance(v, str) and v for v in voter_set):
            raise SchemaViolation("voters must be a non-empty list of identifiers")
        if quorum < 1:
            raise SchemaViolation("quorum must be at least 1")
        if not 0 < threshold <= 1:
            raise SchemaViolation("threshold must lie in (0, 1]")
        if key is None:
            key = keygen(self.key_bits)
        now = self.ledger.now()
        round_id = canonical_hash(
            {"opened_at": now, "seq": self._seq, "subject_hash": subject_hash}
        )
        payload = {
            "exponent": key.e,
            "modulus": format(key.n, "x"),
            "options": list(options),
            "quorum": quorum,
            "round_id": round_id,
            "subject_hash": subject_hash,
            "threshold_den": threshold.denominator,
            "threshold_num": threshold.numerator,
        }
        self.ledger.commit([make_event(EventKind.VOTE_ROUND_OPENED, payload, author, now)])
        rnd = self.rounds[round_id]
        rnd.eligible_voters = voter_set
        self.keys[round_id] = key
        self.issued[round_id] = set()
        for callback in self.on_open:
            callback(rnd, key)
        return rnd

    def restore_round(self, round_id: str, voters: Sequence[str], key: RsaKeyPair) -> None:
        """Re-attach off-ledger round state (eligibility, registrar key) after replay."""
        rnd = self.get_round(round_id)
        rnd.eligible_voters = frozenset(voters)
        self.keys[round_id] = key
        self.issued.setdefault(round_id, set())

    def restore_issued(self, round_id: str, voter: str) -> None:
        self.issued.setdefault(round_id, set()).add(voter)

    def request_ballot(self, round_id: str, voter: str, blinded: int) -> int:
        """Blind-sign one ballot digest for an eligible voter.

        The issuance log records only (round, voter) — the blinded value is
        opaque to the registrar and the serial never appears here.
        """
        rnd = self.get_round(round_id)
        if not rnd.open:
            raise RoundClosed(f"round {round_id} is closed")
        if voter not in rnd.eligible_voters:
            raise NotEligible(f"{voter} is not on this round's voter roll")
        if voter in self.issued.setdefault(round_id, set()):
            raise AlreadyIssued(f"{voter} already received a ballot token")
        key = self.keys.get(round_id)
        if key is None:
            raise UnknownRound(f"registrar key for round {round_id} is not loaded")
        if not isinstance(blinded, int) or isinstance(blinded, bool):
            raise SchemaViolation("blinded value must be an integer")
        if not 0 < blinded < key.n:
            raise MessageOutOfRange("blinded value must lie in (0, n)")
        signature = sign_blinded(blinded, key)
        self.issued[round_id].add(voter)
        for callback in self.on_issue:
            callback(round_id, voter)
        return signature

    def cast_vote(self, round_id: str, serial: bytes, option: str, signature: int) -> dict:
        rnd = self.get_round(round_id)
        if not rnd.open:
            raise RoundClosed(f"round {round_id} is closed")
        if option not in rnd.options:
            raise UnknownOption(f"option {option!r} is not on the ballot")
        if not isinstance(signature, int) or isinstance(signature, bool):
            raise SchemaViolation("signature must be an integer")
        digest = fdh(round_id, serial, rnd.public_key.n)
        if not verify_signature(digest, signature, rnd.public_key):
            raise InvalidSignature("ballot signature does not verify")
        serial_hex = serial.hex()
        if serial_hex in rnd.used_serials:
            raise DuplicateSerial("this ballot serial was already spent")
        now = self.ledger.now()
        payload = {"option": option, "round_id": round_id, "serial": serial_hex}
        block = self.ledger.commit([make_event(EventKind.VOTE_CAST, payload, "ballot", now)])
        return {
            "block_height": block.header.height,
            "option": option,
            "round_id": round_id,
            "serial": serial_hex,
        }

    def close_round(self, round_id: str, author: str) -> TallyResult:
        rnd = self.get_round(round_id)
        if not rnd.open:
            raise RoundClosed(f"round {round_id} is already closed")
        total, passing = decide_passing(rnd.counts, rnd.quorum, rnd.threshold)
        now = self.ledger.now()
        payload = {
            "counts": dict(rnd.counts),
            "passing": passing,
            "quorum": rnd.quorum,
            "round_id": round_id,
            "subject_hash": rnd.subject_hash,
            "threshold_den": rnd.threshold.denominator,
            "threshold_num": rnd.threshold.numerator,
            "total": total,
        }
        self.ledger.commit([make_event(EventKind.VOTE_ROUND_CLOSED, payload, author, now)])
        return self.tallies[round_id]


def tally_from_chain(blocks: Sequence[Block], round_id: str) -> TallyResult:
    """Recount a round directly from chain events — the public-audit path.

    Uses only on-ledger data, so any observer reproduces the official tally.
    """
    params: Optional[dict] = None
    counts: dict[str, int] = {}
    seen: set[str] = set()
    for block in blocks:
        for event in block.events:
            p = event.payload
            if p.get("round_id") != round_id:
                continue
            if event.kind is EventKind.VOTE_ROUND_OPENED:
                params = p
            elif event.kind is EventKind.VOTE_CAST:
                if p["serial"] in seen:
                    raise DuplicateSerial(f"serial {p['serial']} appears twice on-chain")
                seen.add(p["serial"])
                counts[p["option"]] = counts.get(p["option"], 0) + 1
    if params is None:
        raise UnknownRound(f"no round {round_id} on this chain")
    quorum = params["quorum"]
    threshold = Fraction(params["threshold_num"], params["threshold_den"])
    total, passing = decide_passing(counts, quorum, threshold)
    return TallyResult(
        round_id=round_id,
        subject_hash=params["subject_hash"],
        counts=counts,
        total=total,
        passing=passing,
        quorum=quorum,
        threshold=threshold,
    )
