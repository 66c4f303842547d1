"""Merkle tree over 32-byte leaf hashes, with inclusion proofs.

Levels with an odd number of nodes duplicate their last hash. The empty
tree's root is SHA-256 of the empty byte string; a single leaf is its own
root.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .canon import sha256
from .errors import IndexOutOfRange, SchemaViolation

EMPTY_ROOT = sha256(b"")

LEFT = "left"
RIGHT = "right"


@dataclass(frozen=True)
class MerkleProof:
    """Sibling path from one leaf up to the root.

    Each step records which side the sibling sits on relative to the
    running hash.
    """

    leaf_index: int
    siblings: tuple[tuple[str, bytes], ...]

    def to_wire(self) -> dict:
        return {
            "leaf_index": self.leaf_index,
            "siblings": [[side, sib.hex()] for side, sib in self.siblings],
        }

    @classmethod
    def from_wire(cls, wire: dict) -> "MerkleProof":
        try:
            siblings = tuple(
                (side, bytes.fromhex(sib)) for side, sib in wire["siblings"]
            )
            return cls(leaf_index=int(wire["leaf_index"]), siblings=siblings)
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaViolation(f"malformed merkle proof: {exc}") from exc


def _next_level(level: list[bytes]) -> list[bytes]:
    if len(level) % 2:
        level = level + [level[-1]]
    return [sha256(level[i] + level[i + 1]) for i in range(0, len(level), 2)]


def merkle_root(leaf_hashes: Sequence[bytes]) -> bytes:
    if not leaf_hashes:
        return EMPTY_ROOT
    level = list(leaf_hashes)
    while len(level) > 1:
        level = _next_level(level)
    return level[0]


def merkle_prove(leaf_hashes: Sequence[bytes], leaf_index: int) -> MerkleProof:
    if not 0 <= leaf_index < len(leaf_hashes):
        raise IndexOutOfRange(
            f"leaf index {leaf_index} out of range for {len(leaf_hashes)} leaves"
        )
    siblings: list[tuple[str, bytes]] = []
    level = list(leaf_hashes)
    index = leaf_index
    while len(level) > 1:
        if len(level) % 2:
            level = level + [level[-1]]
        partner = index ^ 1
        side = LEFT if partner < index else RIGHT
        siblings.append((side, level[partner]))
        level = [sha256(level[i] + level[i + 1]) for i in range(0, len(level), 2)]
        index //= 2
    return MerkleProof(leaf_index=leaf_index, siblings=tuple(siblings))


def verify_proof(leaf_hash: bytes, proof: MerkleProof, root: bytes) -> bool:
    acc = leaf_hash
    for side, sibling in proof.siblings:
        if side == LEFT:
            acc = sha256(sibling + acc)
        elif side == RIGHT:
            acc = sha256(acc + sibling)
        else:
            return False
    return acc == root
