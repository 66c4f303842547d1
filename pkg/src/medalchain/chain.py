"""Hash-chained, Merkle-rooted, proof-of-work sealed block chain.

Difficulty is the number of leading zero bits required of the header hash.
Mining searches nonces deterministically from 0 so that identical inputs
always yield identical blocks. The genesis block is fully pinned: height 0,
all-zero previous hash, no events, difficulty 0, timestamp 0, nonce 0.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

from .canon import canonical_decode, canonical_encode, is_hash_hex, sha256
from .errors import (
    DifficultyOutOfRange,
    EmptyBlock,
    NonceExhausted,
    SchemaViolation,
)
from .events import (
    LedgerEvent,
    event_from_wire,
    payload_references,
    recompute_event_id,
)
from .merkle import MerkleProof, merkle_prove, merkle_root, verify_proof

ZERO_HASH = "0" * 64
MAX_DIFFICULTY = 24
MAX_NONCE = 2**64 - 1

_HEADER_WIRE_KEYS = {"difficulty", "height", "merkle_root", "nonce", "prev_hash", "timestamp"}


@dataclass(frozen=True)
class BlockHeader:
    height: int
    prev_hash: str
    merkle_root: str
    timestamp: int
    difficulty: int
    nonce: int

    def to_wire(self) -> dict:
        return {
            "difficulty": self.difficulty,
            "height": self.height,
            "merkle_root": self.merkle_root,
            "nonce": self.nonce,
            "prev_hash": self.prev_hash,
            "timestamp": self.timestamp,
        }


@dataclass(frozen=True)
class Block:
    header: BlockHeader
    events: tuple[LedgerEvent, ...]

    def to_wire(self) -> dict:
        return {
            "events": [e.to_wire() for e in self.events],
            "header": self.header.to_wire(),
        }


def _require_uint(wire: dict, key: str, upper: Optional[int] = None) -> int:
    value = wire[key]
    if not isinstance(value, int) or isinstance(value, bool) or value < 0:
        raise SchemaViolation(f"{key} must be a non-negative integer")
    if upper is not None and value > upper:
        raise SchemaViolation(f"{key} exceeds bound {upper}")
    return value


def header_from_wire(wire: dict) -> BlockHeader:
    if not isinstance(wire, dict) or set(wire.keys()) != _HEADER_WIRE_KEYS:
        raise SchemaViolation("header wire form must have exactly the header keys")
    for key in ("merkle_root", "prev_hash"):
        if not is_hash_hex(wire[key]):
            raise SchemaViolation(f"{key} must be 64 lowercase hex chars")
    return BlockHeader(
        height=_require_uint(wire, "height"),
        prev_hash=wire["prev_hash"],
        merkle_root=wire["merkle_root"],
        timestamp=_require_uint(wire, "timestamp"),
        difficulty=_require_uint(wire, "difficulty", upper=256),
        nonce=_require_uint(wire, "nonce", upper=MAX_NONCE),
    )


def block_from_wire(wire: dict) -> Block:
    if not isinstance(wire, dict) or set(wire.keys()) != {"events", "header"}:
        raise SchemaViolation("block wire form must have exactly events and header")
    header = header_from_wire(wire["header"])
    raw_events = wire["events"]
    if not isinstance(raw_events, list):
        raise SchemaViolation("events must be a list")
    events = tuple(event_from_wire(e) for e in raw_events)
    if header.height > 0 and not events:
        raise EmptyBlock("non-genesis block carries no events")
    if header.height == 0 and events:
        raise SchemaViolation("genesis block must carry no events")
    return Block(header=header, events=events)


def encode_block(block: Block) -> bytes:
    return canonical_encode(block.to_wire())


def decode_block(data: bytes) -> Block:
    return block_from_wire(canonical_decode(data))


def header_hash_bytes(header: BlockHeader) -> bytes:
    return sha256(canonical_encode(header.to_wire()))


def header_hash(header: BlockHeader) -> str:
    return header_hash_bytes(header).hex()


def leading_zero_bits(digest: bytes) -> int:
    return 256 - int.from_bytes(digest, "big").bit_length()


def meets_difficulty(header: BlockHeader) -> bool:
    return leading_zero_bits(header_hash_bytes(header)) >= header.difficulty


def block_merkle_root(events: Sequence[LedgerEvent]) -> str:
    return merkle_root([bytes.fromhex(e.event_id) for e in events]).hex()


def genesis_block() -> Block:
    header = BlockHeader(
        height=0,
        prev_hash=ZERO_HASH,
        merkle_root=merkle_root([]).hex(),
        timestamp=0,
        difficulty=0,
        nonce=0,
    )
    return Block(header=header, events=())


_GENESIS = genesis_block()


def mine_block(
    parent: BlockHeader,
    events: Sequence[LedgerEvent],
    difficulty: int,
    timestamp: int,
    max_difficulty: int = MAX_DIFFICULTY,
) -> Block:
    """Seal `events` on top of `parent`, searching nonces from 0."""
    if not 0 <= difficulty <= max_difficulty:
        raise DifficultyOutOfRange(f"difficulty {difficulty} outside [0, {max_difficulty}]")
    if not events:
        raise EmptyBlock("refusing to mine a block with no events")
    root = block_merkle_root(events)
    parent_hash = header_hash(parent)
    for nonce in range(MAX_NONCE + 1):
        header = BlockHeader(
            height=parent.height + 1,
            prev_hash=parent_hash,
            merkle_root=root,
            timestamp=timestamp,
            difficulty=difficulty,
            nonce=nonce,
        )
        if meets_difficulty(header):
            return Block(header=header, events=tuple(events))
    raise NonceExhausted("no nonce satisfies the difficulty predicate")


@dataclass(frozen=True)
class ChainFault:
    code: str
    height: int


def _validate_link(block: Block, prev: BlockHeader, expected_difficulty: Optional[int]) -> Optional[ChainFault]:
    h = block.header
    i = prev.height + 1
    if h.height != i:
        return ChainFault("BadHeight", i)
    if h.prev_hash != header_hash(prev):
        return ChainFault("BrokenLink", i)
    if h.timestamp < prev.timestamp:
        return ChainFault("TimestampRegression", i)
    if not block.events:
        return ChainFault("EmptyBlock", i)
    for event in block.events:
        if recompute_event_id(event) != event.event_id:
            return ChainFault("MerkleMismatch", i)
    if block_merkle_root(block.events) != h.merkle_root:
        return ChainFault("MerkleMismatch", i)
    if expected_difficulty is not None and h.difficulty != expected_difficulty:
        return ChainFault("InsufficientWork", i)
    if not meets_difficulty(h):
        return ChainFault("InsufficientWork", i)
    return None


def validate_chain(
    chain: Sequence[Block],
    expected_difficulty: Optional[int] = None,
) -> Optional[ChainFault]:
    """Full structural validation; returns the first fault or None.

    With `expected_difficulty` given, every non-genesis header must declare
    exactly that difficulty — a chain cannot quietly lower its own bar.
    """
    if not chain or chain[0] != _GENESIS:
        return ChainFault("BadGenesis", 0)
    prev = chain[0].header
    for block in chain[1:]:
        fault = _validate_link(block, prev, expected_difficulty)
        if fault is not None:
            return fault
        prev = block.header
    return None


def total_work(chain: Sequence[Block]) -> int:
    return sum(2 ** b.header.difficulty for b in chain)


@dataclass(frozen=True)
class TraceHit:
    height: int
    event: LedgerEvent
    proof: MerkleProof
    root: str

    def verify(self) -> bool:
        return verify_proof(bytes.fromhex(self.event.event_id), self.proof, bytes.fromhex(self.root))

    def to_wire(self) -> dict:
        return {
            "event": self.event.to_wire(),
            "height": self.height,
            "proof": self.proof.to_wire(),
            "root": self.root,
        }


def block_prove(block: Block, leaf_index: int) -> MerkleProof:
    return merkle_prove([bytes.fromhex(e.event_id) for e in block.events], leaf_index)


def trace(chain: Sequence[Block], subject: str) -> list[TraceHit]:
    """All events referencing `subject`, in chain order, each with its proof."""
    hits: list[TraceHit] = []
    for block in chain:
        for index, event in enumerate(block.events):
            if event.author == subject or payload_references(event.payload, subject):
                hits.append(
                    TraceHit(
                        height=block.header.height,
                        event=event,
                        proof=block_prove(block, index),
                        root=block.header.merkle_root,
                    )
                )
    return hits


def _wall_clock() -> int:
    return int(time.time())


@dataclass
class Ledger:
    """Single-writer chain state plus a pending-event pool.

    Committed blocks are immutable; the only growth operation appends a new
    block. `on_commit` subscribers see every appended block exactly once,
    including blocks re-applied during storage replay.
    """

    difficulty: int = 8
    batch_size: int = 16
    clock: Callable[[], int] = _wall_clock
    max_difficulty: int = MAX_DIFFICULTY
    on_commit: list = field(default_factory=list)

    def __post_init__(self) -> None:
        if not 0 <= self.difficulty <= self.max_difficulty:
            raise DifficultyOutOfRange(
                f"difficulty {self.difficulty} outside [0, {self.max_difficulty}]"
            )
        if self.batch_size < 1:
            raise SchemaViolation("batch_size must be at least 1")
        self._blocks: list[Block] = [genesis_block()]
        self._pending: list[LedgerEvent] = []

    # -- read side ----------------------------------------------------------

    @property
    def blocks(self) -> tuple[Block, ...]:
        return tuple(self._blocks)

    @property
    def pending(self) -> tuple[LedgerEvent, ...]:
        return tuple(self._pending)

    @property
    def tip(self) -> Block:
        return self._blocks[-1]

    @property
    def tip_hash(self) -> str:
        return header_hash(self.tip.header)

    @property
    def height(self) -> int:
        return self.tip.header.height

    def now(self) -> int:
        return int(self.clock())

    def validate(self, expected_difficulty: Optional[int] = None) -> Optional[ChainFault]:
        if expected_difficulty is None:
            expected_difficulty = self.difficulty
        return validate_chain(self._blocks, expected_difficulty)

    def trace(self, subject: str) -> list[TraceHit]:
        return trace(self._blocks, subject)

    def total_work(self) -> int:
        return total_work(self._blocks)

    def events(self) -> Iterable[LedgerEvent]:
        for block in self._blocks:
            yield from block.events

    # -- write side -----------------------------------------------------------

    def commit(self, events: Sequence[LedgerEvent], timestamp: Optional[int] = None) -> Block:
        """Seal `events` into one block on the current tip."""
        ts = self.now() if timestamp is None else timestamp
        ts = max(ts, self.tip.header.timestamp)
        block = mine_block(
            self.tip.header, events, self.difficulty, ts, self.max_difficulty
        )
        self._append(block)
        return block

    def submit(self, event: LedgerEvent) -> Optional[Block]:
        """Queue an event; seals a block once the batch threshold is reached."""
        self._pending.append(event)
        if len(self._pending) >= self.batch_size:
            return self.flush()
        return None

    def flush(self) -> Optional[Block]:
        if not self._pending:
            return None
        events, self._pending = self._pending, []
        return self.commit(events)

    def append_block(self, block: Block) -> None:
        """Append an externally produced block (replay or network sync)."""
        fault = _validate_link(block, self.tip.header, self.difficulty)
        if fault is not None:
            raise SchemaViolation(f"block rejected: {fault.code} at height {fault.height}")
        self._append(block)

    def adopt_chain(self, chain: Sequence[Block]) -> None:
        """Replace the local replica with a validated competing chain."""
        fault = validate_chain(chain, self.difficulty)
        if fault is not None:
            raise SchemaViolation(f"chain rejected: {fault.code} at height {fault.height}")
        self._blocks = list(chain)

    def _append(self, block: Block) -> None:
        self._blocks.append(block)
        for callback in self.on_commit:
            callback(block)
