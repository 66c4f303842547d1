/**
 * Canonical JSON encoding and hashing, byte-compatible with the node.
 *
 * The node hashes the UTF-8 bytes of a JSON document with sorted keys,
 * compact separators, and non-ASCII characters left unescaped. Anything the
 * console verifies client-side (event ids, Merkle roots, ballot digests) has
 * to reproduce those bytes exactly, so this module is deliberately strict:
 * floats, null, and undefined are rejected rather than guessed at.
 */

import { bytesToHex } from "./bigint.js";

export type Canonical =
  | boolean
  | number
  | bigint
  | string
  | Uint8Array
  | Canonical[]
  | { [key: string]: Canonical };

/**
 * Compare strings by Unicode code point.
 *
 * The default string ordering compares UTF-16 code units, which disagrees
 * with code-point order for characters outside the basic plane — and the
 * node sorts keys by code point.
 */
function compareCodePoints(a: string, b: string): number {
  const ai = a[Symbol.iterator]();
  const bi = b[Symbol.iterator]();
  for (;;) {
    const an = ai.next();
    const bn = bi.next();
    if (an.done && bn.done) return 0;
    if (an.done) return -1;
    if (bn.done) return 1;
    const ac = an.value.codePointAt(0)!;
    const bc = bn.value.codePointAt(0)!;
    if (ac !== bc) return ac - bc;
  }
}

function canonicalText(value: Canonical): string {
  if (typeof value === "boolean") return value ? "true" : "false";
  if (typeof value === "bigint") {
    if (value < 0n) throw new TypeError("negative integers do not appear in hashed content");
    return value.toString(10);
  }
  if (typeof value === "number") {
    if (!Number.isSafeInteger(value)) {
      throw new TypeError(`only exact integers may be hashed, got ${value}`);
    }
    return String(value);
  }
  if (typeof value === "string") return JSON.stringify(value);
  if (value instanceof Uint8Array) return JSON.stringify(bytesToHex(value));
  if (Array.isArray(value)) {
    return "[" + value.map(canonicalText).join(",") + "]";
  }
  if (value !== null && typeof value === "object") {
    const keys = Object.keys(value).sort(compareCodePoints);
    return "{" + keys.map((k) => JSON.stringify(k) + ":" + canonicalText(value[k]!)).join(",") + "}";
  }
  throw new TypeError(`value cannot appear in hashed content: ${String(value)}`);
}

/** Canonical UTF-8 bytes for a value. */
export function canonicalEncode(value: Canonical): Uint8Array {
  return new TextEncoder().encode(canonicalText(value));
}

/** SHA-256 of raw bytes via Web Crypto. */
export async function sha256(data: Uint8Array): Promise<Uint8Array> {
  // Copy into a fresh buffer so the view is over a plain ArrayBuffer,
  // which is what subtle.digest's signature demands.
  const view = new Uint8Array(data);
  const digest = await crypto.subtle.digest("SHA-256", view);
  return new Uint8Array(digest);
}

/** Lowercase-hex SHA-256 of a value's canonical encoding. */
export async function canonicalHash(value: Canonical): Promise<string> {
  return bytesToHex(await sha256(canonicalEncode(value)));
}

/** Concatenate byte arrays (for domain-tagged hashes). */
export function concatBytes(...parts: Uint8Array[]): Uint8Array {
  const total = parts.reduce((sum, part) => sum + part.length, 0);
  const out = new Uint8Array(total);
  let offset = 0;
  for (const part of parts) {
    out.set(part, offset);
    offset += part.length;
  }
  return out;
}

/** UTF-8 bytes of a string. */
export function utf8(text: string): Uint8Array {
  return new TextEncoder().encode(text);
}
