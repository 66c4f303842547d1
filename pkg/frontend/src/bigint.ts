/**
 * Arbitrary-precision helpers for the browser console.
 *
 * Everything here sticks to native BigInt and the Web Crypto RNG so the same
 * code runs in the browser and under vitest on node, with no Buffer and no
 * external math library.
 */

/** Modular exponentiation by square-and-multiply. */
export function modPow(base: bigint, exponent: bigint, modulus: bigint): bigint {
  if (modulus <= 0n) throw new RangeError("modulus must be positive");
  if (exponent < 0n) throw new RangeError("negative exponents are not supported");
  let result = 1n;
  let b = ((base % modulus) + modulus) % modulus;
  let e = exponent;
  while (e > 0n) {
    if (e & 1n) result = (result * b) % modulus;
    b = (b * b) % modulus;
    e >>= 1n;
  }
  return result;
}

/**
 * Modular inverse via the extended Euclidean algorithm.
 *
 * Throws when the value shares a factor with the modulus; callers that picked
 * the value at random should draw a fresh one instead of retrying this call.
 */
export function modInverse(value: bigint, modulus: bigint): bigint {
  let [oldR, r] = [((value % modulus) + modulus) % modulus, modulus];
  let [oldS, s] = [1n, 0n];
  while (r !== 0n) {
    const q = oldR / r;
    [oldR, r] = [r, oldR - q * r];
    [oldS, s] = [s, oldS - q * s];
  }
  if (oldR !== 1n) throw new RangeError("value is not invertible for this modulus");
  return ((oldS % modulus) + modulus) % modulus;
}

/** Lowercase hex for a byte array. */
export function bytesToHex(bytes: Uint8Array): string {
  let out = "";
  for (const byte of bytes) out += byte.toString(16).padStart(2, "0");
  return out;
}

/** Parse lowercase/uppercase hex into bytes; the string must have even length. */
export function hexToBytes(hex: string): Uint8Array {
  if (hex.length % 2 !== 0 || /[^0-9a-fA-F]/.test(hex)) {
    throw new RangeError(`not a hex string: ${JSON.stringify(hex)}`);
  }
  const out = new Uint8Array(hex.length / 2);
  for (let i = 0; i < out.length; i += 1) {
    out[i] = parseInt(hex.slice(2 * i, 2 * i + 2), 16);
  }
  return out;
}

/** Big-endian bytes to BigInt. */
export function bytesToBigInt(bytes: Uint8Array): bigint {
  let result = 0n;
  for (const byte of bytes) result = (result << 8n) | BigInt(byte);
  return result;
}

/** BigInt to minimal unpadded lowercase hex, matching integers formatted with "%x". */
export function bigIntToHex(value: bigint): string {
  if (value < 0n) throw new RangeError("negative values have no wire form");
  return value.toString(16);
}

/** Parse an unpadded hex integer (the node's wire form for moduli and signatures). */
export function hexToBigInt(hex: string): bigint {
  if (hex.length === 0 || /[^0-9a-fA-F]/.test(hex)) {
    throw new RangeError(`not a hex integer: ${JSON.stringify(hex)}`);
  }
  return BigInt("0x" + hex);
}

/** Cryptographically random bytes from the platform RNG. */
export function randomBytes(length: number): Uint8Array {
  const out = new Uint8Array(length);
  crypto.getRandomValues(out);
  return out;
}

/**
 * Uniform random BigInt in [1, bound) by rejection sampling.
 *
 * Used for blinding factors, where a biased draw would leak structure to
 * anyone correlating ballots.
 */
export function randomBelow(bound: bigint): bigint {
  if (bound <= 1n) throw new RangeError("bound must exceed 1");
  const byteLength = Math.ceil(bound.toString(16).length / 2);
  for (;;) {
    const candidate = bytesToBigInt(randomBytes(byteLength));
    if (candidate >= 1n && candidate < bound) return candidate;
  }
}
