/**
 * Request signing for authenticated endpoints.
 *
 * Mutating endpoints (other than anonymous ballot casting) expect two
 * headers: the actor id and an RSA signature over a digest that binds the
 * HTTP method, the path, and the exact request body bytes. The body string
 * signed here must therefore be the same string that goes on the wire —
 * serialize once, sign it, send it.
 */

import { bigIntToHex, bytesToBigInt, hexToBigInt, modPow } from "./bigint.js";
import { concatBytes, sha256, utf8 } from "./canon.js";

export const ACTOR_HEADER = "X-Actor-Id";
export const SIGNATURE_HEADER = "X-Signature";

const REQUEST_TAG = utf8("request");

/** A credential the console can sign with. */
export interface Credential {
  actorId: string;
  modulus: bigint;
  exponent: bigint;
  secret: bigint;
}

/** Parse a credential from its JSON wire form (hex modulus/secret). */
export function credentialFromWire(wire: {
  actor_id: string;
  modulus: string;
  exponent: number;
  secret: string;
}): Credential {
  return {
    actorId: wire.actor_id,
    modulus: hexToBigInt(wire.modulus),
    exponent: BigInt(wire.exponent),
    secret: hexToBigInt(wire.secret),
  };
}

/** Digest binding method, path, and body into the signer's modulus. */
export async function requestDigest(
  method: string,
  path: string,
  body: string,
  modulus: bigint,
): Promise<bigint> {
  const preimage = concatBytes(
    REQUEST_TAG,
    utf8(method.toUpperCase() + "\n" + path + "\n"),
    utf8(body),
  );
  const value = bytesToBigInt(await sha256(preimage)) % modulus;
  return value === 0n ? 1n : value;
}

/** Sign a request, returning the unpadded-hex signature header value. */
export async function signRequest(
  credential: Credential,
  method: string,
  path: string,
  body: string,
): Promise<string> {
  const digest = await requestDigest(method, path, body, credential.modulus);
  return bigIntToHex(modPow(digest, credential.secret, credential.modulus));
}
