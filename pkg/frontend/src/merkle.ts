/**
 * Client-side Merkle verification.
 *
 * The wallet and the voting booth both refuse to take the node's word for
 * inclusion: they recompute event ids from event content and fold the
 * server-supplied sibling path back up to the block header's root. Leaves
 * are the raw 32 bytes of each event id; odd levels duplicate their last
 * node; the empty tree hashes the empty string.
 */

import { bytesToHex, hexToBytes } from "./bigint.js";
import { canonicalEncode, concatBytes, sha256, type Canonical } from "./canon.js";

/** One sibling step: which side the sibling joins on, and its hash (hex). */
export type ProofStep = [side: string, siblingHex: string];

export interface ProofWire {
  leaf_index: number;
  siblings: ProofStep[];
}

/** Event fields that participate in the event id. */
export interface EventContent {
  kind: string;
  payload: Record<string, Canonical>;
  author: string;
  timestamp: number;
}

/** Recompute an event's id from its content: SHA-256 over [kind, payload, author, timestamp]. */
export async function eventContentId(event: EventContent): Promise<string> {
  const encoded = canonicalEncode([event.kind, event.payload, event.author, event.timestamp]);
  return bytesToHex(await sha256(encoded));
}

/** Root over 32-byte leaves, duplicating the last node of odd levels. */
export async function merkleRoot(leaves: Uint8Array[]): Promise<string> {
  if (leaves.length === 0) return bytesToHex(await sha256(new Uint8Array(0)));
  let level = leaves.slice();
  while (level.length > 1) {
    if (level.length % 2 === 1) level.push(level[level.length - 1]!);
    const next: Uint8Array[] = [];
    for (let i = 0; i < level.length; i += 2) {
      next.push(await sha256(concatBytes(level[i]!, level[i + 1]!)));
    }
    level = next;
  }
  return bytesToHex(level[0]!);
}

/** Fold a sibling path from a leaf hash and compare with the expected root. */
export async function verifyProof(
  leafHex: string,
  proof: ProofWire,
  rootHex: string,
): Promise<boolean> {
  let acc = hexToBytes(leafHex);
  for (const [side, siblingHex] of proof.siblings) {
    const sibling = hexToBytes(siblingHex);
    if (side === "left") {
      acc = await sha256(concatBytes(sibling, acc));
    } else if (side === "right") {
      acc = await sha256(concatBytes(acc, sibling));
    } else {
      return false;
    }
  }
  return bytesToHex(acc) === rootHex;
}
