"""Deterministic in-process network of full-replica nodes.

Every node holds a complete chain copy, broadcasts blocks, and resolves forks
by accumulated work. There is no wall clock and no unseeded randomness: a
scenario script plus a seed fully determines the final state, which is what
makes the replication and fault-tolerance claims testable.

Scenario scripts are line-oriented:

    nodes a,b,c          # declare the node set (directive, first line)
    difficulty 4         # optional directive
    submit a             # inject one synthetic event at node a, broadcast it
    mine a               # node a seals its pool (self-feeds if empty) + announces
    deliver a b          # drain the a->b link
    partition a,b|c      # split into groups; cross-group messages drop
    heal                 # lift the partition
    tamper c [mode]      # make c byzantine: tamper | withhold | equivocate
    offline a / online a
    sync                 # mine pending pools, announce all tips, drain every queue

`#` starts a comment; blank lines are skipped.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .canon import canonical_hash
from .chain import (
    Block,
    Ledger,
    block_merkle_root,
    header_hash,
    meets_difficulty,
    mine_block,
    total_work,
    validate_chain,
)
from .errors import BadPartition, NoValidCandidate, SchemaViolation, UnknownNode
from .events import EventKind, LedgerEvent, make_event, recompute_event_id

BYZANTINE_MODES = ("tamper", "withhold", "equivocate")

EVENT_SUBMIT = "EventSubmit"
BLOCK_ANNOUNCE = "BlockAnnounce"
CHAIN_REQUEST = "ChainRequest"
CHAIN_RESPONSE = "ChainResponse"


@dataclass(frozen=True)
class NetMessage:
    kind: str
    sender: str
    payload: object  # LedgerEvent | Block | tuple[Block, ...] | None


def fork_choice(candidates: Sequence[Sequence[Block]], expected_difficulty: int) -> Sequence[Block]:
    """Heaviest valid chain; ties fall to the lexicographically smaller tip hash."""
    valid = [c for c in candidates if validate_chain(c, expected_difficulty) is None]
    if not valid:
        raise NoValidCandidate("every candidate chain failed validation")
    best_work = max(total_work(c) for c in valid)
    contenders = [c for c in valid if total_work(c) == best_work]
    return min(contenders, key=lambda c: header_hash(c[-1].header))


def plausible_block(block: Block, expected_difficulty: int) -> bool:
    """Parent-independent sanity of an announced block; cheap pre-filter so
    tampered announcements are dropped without a chain request."""
    h = block.header
    if h.height < 1 or not block.events:
        return False
    if any(recompute_event_id(e) != e.event_id for e in block.events):
        return False
    if block_merkle_root(block.events) != h.merkle_root:
        return False
    return h.difficulty == expected_difficulty and meets_difficulty(h)


@dataclass
class SimNode:
    node_id: str
    ledger: Ledger
    online: bool = True
    byzantine: Optional[str] = None
    pool: dict[str, LedgerEvent] = field(default_factory=dict)

    @property
    def honest(self) -> bool:
        return self.byzantine is None

    def chain_digest(self) -> str:
        return canonical_hash([b.to_wire() for b in self.ledger.blocks])

    def pool_events(self) -> list[LedgerEvent]:
        return sorted(self.pool.values(), key=lambda e: (e.timestamp, e.event_id))

    def absorb_chain(self, chain: Sequence[Block]) -> None:
        """Adopt a competing chain, returning orphaned events to the pool."""
        old = self.ledger.blocks
        self.ledger.adopt_chain(chain)
        new_ids = {e.event_id for b in chain for e in b.events}
        for block in old[1:]:
            for event in block.events:
                if event.event_id not in new_ids:
                    self.pool[event.event_id] = event
        for known in new_ids:
            self.pool.pop(known, None)


class Network:
    """The simulated cluster plus its per-link FIFO queues."""

    def __init__(
        self,
        node_ids: Sequence[str],
        seed: int = 0,
        difficulty: int = 8,
        base_time: int = 1_000_000,
    ):
        if not node_ids or len(set(node_ids)) != len(node_ids):
            raise SchemaViolation("node ids must be non-empty and unique")
        self.seed = seed
        self.difficulty = difficulty
        self.base_time = base_time
        self.tick = 0
        self._event_seq = 0
        self.nodes: dict[str, SimNode] = {}
        for node_id in node_ids:
            self.nodes[node_id] = SimNode(
                node_id=node_id,
                ledger=Ledger(difficulty=difficulty, clock=self._now),
            )
        self.links: dict[tuple[str, str], deque[NetMessage]] = {
            (a, b): deque() for a in node_ids for b in node_ids if a != b
        }
        self.partition: Optional[list[frozenset[str]]] = None

    # -- plumbing ---------------------------------------------------------------

    def _now(self) -> int:
        return self.base_time + self.tick

    def node(self, node_id: str) -> SimNode:
        node = self.nodes.get(node_id)
        if node is None:
            raise UnknownNode(f"no node {node_id!r} in this network")
        return node

    def honest_online(self) -> list[SimNode]:
        return [n for n in self._sorted_nodes() if n.honest and n.online]

    def digests(self) -> dict[str, str]:
        return {node_id: node.chain_digest() for node_id, node in sorted(self.nodes.items())}

    def _sorted_nodes(self) -> list[SimNode]:
        return [self.nodes[k] for k in sorted(self.nodes)]

    def _same_side(self, a: str, b: str) -> bool:
        if self.partition is None:
            return True
        return any(a in group and b in group for group in self.partition)

    def _send(self, src: str, dst: str, message: NetMessage) -> None:
        if not self.nodes[src].online or not self.nodes[dst].online:
            return
        if not self._same_side(src, dst):
            return
        self.links[(src, dst)].append(message)

    def _broadcast(self, src: str, message: NetMessage) -> None:
        for dst in sorted(self.nodes):
            if dst != src:
                self._send(src, dst, message)

    def _drain_link(self, src: str, dst: str) -> None:
        queue = self.links[(src, dst)]
        pending = list(queue)
        queue.clear()
        for message in pending:
            # Partition/offline rules apply in flight too: a message crossing
            # a boundary that exists at delivery time is lost.
            if not self.nodes[dst].online or not self._same_side(src, dst):
                continue
            self._receive(dst, message)

    def _drain_all(self) -> None:
        for _ in range(10_000):
            busy = [link for link in sorted(self.links) if self.links[link]]
            if not busy:
                return
            for src, dst in busy:
                self._drain_link(src, dst)
        raise RuntimeError("message queues failed to quiesce")

    # -- node behaviour ----------------------------------------------------------

    def _synthetic_event(self, author: str) -> LedgerEvent:
        self._event_seq += 1
        token_id = canonical_hash(["sim-token", self.seed, self._event_seq])
        payload = {
            "definition_id": canonical_hash(["sim-definition", self.seed]),
            "grade": "standard",
            "holder": f"holder-{self._event_seq}",
            "issuer": author,
            "minted_at": self._now(),
            "token_id": token_id,
        }
        return make_event(EventKind.TOKEN_MINTED, payload, author, self._now())

    def _submit(self, node_id: str) -> LedgerEvent:
        node = self.node(node_id)
        event = self._synthetic_event(node_id)
        node.pool[event.event_id] = event
        self._broadcast(node_id, NetMessage(EVENT_SUBMIT, node_id, event))
        return event

    def _mine(self, node_id: str) -> Optional[Block]:
        node = self.node(node_id)
        if not node.pool:
            self._submit(node_id)
        events = node.pool_events()
        block = mine_block(node.ledger.tip.header, events, self.difficulty, self._now())
        node.ledger.append_block(block)
        node.pool.clear()
        self._announce(node, block)
        return block

    def _announce(self, node: SimNode, block: Block) -> None:
        if node.byzantine == "withhold":
            return
        if node.byzantine == "tamper":
            forged = LedgerEvent(
                kind=block.events[0].kind,
                payload={"forged": True, "holder": "mallory"},
                author=block.events[0].author,
                timestamp=block.events[0].timestamp,
                event_id=block.events[0].event_id,
            )
            bent = Block(header=block.header, events=(forged,) + block.events[1:])
            self._broadcast(node.node_id, NetMessage(BLOCK_ANNOUNCE, node.node_id, bent))
            return
        if node.byzantine == "equivocate":
            rival_events = list(block.events) + [self._synthetic_event(node.node_id)]
            rival = mine_block(
                self.nodes[node.node_id].ledger.blocks[block.header.height - 1].header,
                rival_events,
                self.difficulty,
                block.header.timestamp,
            )
            for index, dst in enumerate(sorted(self.nodes)):
                if dst == node.node_id:
                    continue
                variant = block if index % 2 == 0 else rival
                self._send(node.node_id, dst, NetMessage(BLOCK_ANNOUNCE, node.node_id, variant))
            return
        self._broadcast(node.node_id, NetMessage(BLOCK_ANNOUNCE, node.node_id, block))

    def _receive(self, node_id: str, message: NetMessage) -> None:
        node = self.nodes[node_id]
        if message.kind == EVENT_SUBMIT:
            event = message.payload
            on_chain = any(
                e.event_id == event.event_id for b in node.ledger.blocks for e in b.events
            )
            if not on_chain:
                node.pool.setdefault(event.event_id, event)
        elif message.kind == BLOCK_ANNOUNCE:
            self._handle_announce(node, message.sender, message.payload)
        elif message.kind == CHAIN_REQUEST:
            self._send(
                node_id,
                message.sender,
                NetMessage(CHAIN_RESPONSE, node_id, node.ledger.blocks),
            )
        elif message.kind == CHAIN_RESPONSE:
            self._handle_chain(node, message.payload)

    def _handle_announce(self, node: SimNode, sender: str, block: Block) -> None:
        if not plausible_block(block, self.difficulty):
            return  # tampered or underworked: reject outright, no follow-up
        tip = node.ledger.tip.header
        if block.header.prev_hash == header_hash(tip) and block.header.height == tip.height + 1:
            try:
                node.ledger.append_block(block)
            except SchemaViolation:
                return
            for event in block.events:
                node.pool.pop(event.event_id, None)
            return
        if header_hash(block.header) == header_hash(tip):
            return  # already our tip
        # A plausible block we cannot place: fetch the announcer's chain and
        # let fork choice arbitrate.
        self._send(node.node_id, sender, NetMessage(CHAIN_REQUEST, node.node_id, None))

    def _handle_chain(self, node: SimNode, chain: Sequence[Block]) -> None:
        try:
            best = fork_choice([node.ledger.blocks, tuple(chain)], self.difficulty)
        except NoValidCandidate:
            return
        if header_hash(best[-1].header) != node.ledger.tip_hash:
            node.absorb_chain(best)

    # -- scripted instructions ---------------------------------------------------

    def step(self, line: str) -> None:
        text = line.split("#", 1)[0].strip()
        if not text:
            return
        parts = text.split()
        op, args = parts[0], parts[1:]
        self.tick += 1
        if op == "submit" and len(args) == 1:
            self._submit(args[0])
        elif op == "mine" and len(args) == 1:
            self._mine(args[0])
        elif op == "deliver" and len(args) == 2:
            self.node(args[0])
            self.node(args[1])
            self._drain_link(args[0], args[1])
        elif op == "partition" and len(args) == 1:
            self._apply_partition(args[0])
        elif op == "heal" and not args:
            self.partition = None
        elif op == "tamper" and len(args) in (1, 2):
            mode = args[1] if len(args) == 2 else "tamper"
            if mode not in BYZANTINE_MODES:
                raise SchemaViolation(f"unknown byzantine mode {mode!r}")
            self.node(args[0]).byzantine = mode
        elif op == "offline" and len(args) == 1:
            self.node(args[0]).online = False
        elif op == "online" and len(args) == 1:
            self.node(args[0]).online = True
        elif op == "sync" and not args:
            self._sync_round()
        else:
            raise SchemaViolation(f"unrecognized scenario instruction: {text!r}")

    def _apply_partition(self, spec: str) -> None:
        groups = []
        for chunk in spec.split("|"):
            members = [m for m in chunk.split(",") if m]
            for member in members:
                self.node(member)
            groups.append(frozenset(members))
        flat = [m for g in groups for m in g]
        if len(flat) != len(set(flat)):
            raise BadPartition("partition groups overlap")
        if set(flat) != set(self.nodes):
            raise BadPartition("partition groups must cover every node")
        self.partition = groups

    def _sync_round(self) -> None:
        """One full exchange: mine pending pools, announce tips, drain queues."""
        for node in self._sorted_nodes():
            if node.online and node.pool:
                self._mine(node.node_id)
        for node in self._sorted_nodes():
            if node.online and node.byzantine != "withhold":
                tip_block = node.ledger.tip
                if tip_block.header.height > 0:
                    self._broadcast(
                        node.node_id, NetMessage(BLOCK_ANNOUNCE, node.node_id, tip_block)
                    )
        self._drain_all()

    def run_script(self, script: str) -> "Network":
        for line in script.splitlines():
            self.step(line)
        return self


def network_from_script(script: str, seed: int = 0) -> Network:
    """Build and run a scenario whose header directives declare the cluster."""
    node_ids: Optional[list[str]] = None
    difficulty = 8
    body: list[str] = []
    for line in script.splitlines():
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        parts = text.split()
        if parts[0] == "nodes" and len(parts) == 2:
            node_ids = [n for n in parts[1].split(",") if n]
        elif parts[0] == "difficulty" and len(parts) == 2:
            difficulty = int(parts[1])
        else:
            body.append(text)
    if not node_ids:
        raise SchemaViolation("scenario must declare its nodes (e.g. 'nodes a,b,c')")
    network = Network(node_ids, seed=seed, difficulty=difficulty)
    for line in body:
        network.step(line)
    return network
