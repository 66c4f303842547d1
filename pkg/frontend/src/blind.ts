/**
 * Client side of the blind-signature ballot protocol.
 *
 * The booth hashes (round id, serial) into the signer's modulus, blinds that
 * digest with a random factor, and sends only the blinded value to the node.
 * The returned signature is unblinded locally. The blinding factor never
 * leaves this module's caller, which is the entire privacy argument: the
 * authority signs without seeing which serial it endorsed.
 */

import {
  bytesToBigInt,
  modInverse,
  modPow,
  randomBelow,
  randomBytes,
} from "./bigint.js";
import { concatBytes, sha256, utf8 } from "./canon.js";

/** RSA public half, as parsed off the round wire. */
export interface PublicKey {
  modulus: bigint;
  exponent: bigint;
}

/** Serials are fixed-width random identifiers, one per ballot. */
export const SERIAL_BYTES = 16;

const BALLOT_TAG = utf8("ballot");

/**
 * Full-domain hash of a ballot serial into the signer's modulus.
 *
 * Zero is mapped to one because zero is a degenerate base for RSA: its
 * "signature" would verify under any key.
 */
export async function ballotDigest(
  roundId: string,
  serial: Uint8Array,
  modulus: bigint,
): Promise<bigint> {
  const digest = await sha256(concatBytes(BALLOT_TAG, utf8(roundId), serial));
  const value = bytesToBigInt(digest) % modulus;
  return value === 0n ? 1n : value;
}

/** Draw a fresh ballot serial. */
export function newSerial(): Uint8Array {
  return randomBytes(SERIAL_BYTES);
}

/**
 * Draw a blinding factor invertible modulo n.
 *
 * For honest RSA moduli a random draw is invertible with overwhelming
 * probability; the loop exists so a freak collision retries rather than
 * surfacing as an error from the booth.
 */
export function newBlindingFactor(key: PublicKey): bigint {
  for (;;) {
    const factor = randomBelow(key.modulus);
    try {
      modInverse(factor, key.modulus);
      return factor;
    } catch {
      // shares a factor with n; draw again
    }
  }
}

/** Blind a digest: m * r^e mod n. */
export function blind(message: bigint, factor: bigint, key: PublicKey): bigint {
  return (message * modPow(factor, key.exponent, key.modulus)) % key.modulus;
}

/** Strip the blinding factor from a signature over a blinded digest. */
export function unblind(blindSignature: bigint, factor: bigint, key: PublicKey): bigint {
  return (blindSignature * modInverse(factor, key.modulus)) % key.modulus;
}

/** Check a signature against a digest under the signer's public key. */
export function verifySignature(message: bigint, signature: bigint, key: PublicKey): boolean {
  return modPow(signature, key.exponent, key.modulus) === message % key.modulus;
}
