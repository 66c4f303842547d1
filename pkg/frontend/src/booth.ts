/**
 * View-model for the anonymous voting booth.
 *
 * The privacy-critical material — the ballot serial and the blinding factor —
 * is generated here and kept in instance fields that are never serialized.
 * The node sees exactly two things: the blinded digest during issuance
 * (signed, because ballot issuance checks the voter roll) and, at cast time,
 * the bare serial + unblinded signature in an unsigned request. Nothing ties
 * the two together except the voter's own browser memory.
 */

import { ApiError, type ApiClient } from "./api.js";
import { bigIntToHex, bytesToHex, hexToBigInt, hexToBytes } from "./bigint.js";
import {
  ballotDigest,
  blind,
  newBlindingFactor,
  newSerial,
  unblind,
  verifySignature,
  type PublicKey,
} from "./blind.js";
import { eventContentId, merkleRoot } from "./merkle.js";
import type {
  BallotWire,
  BlockWire,
  CastReceiptWire,
  ChainTipWire,
  RoundWire,
} from "./types.js";

export type BoothPhase =
  | "idle"
  | "loaded"
  | "prepared"
  | "issued"
  | "cast"
  | "verified"
  | "verify-failed";

/** What the receipt panel renders after client-side inclusion checking. */
export interface ReceiptCheck {
  blockHeight: number;
  eventFound: boolean;
  eventIdOk: boolean;
  merkleOk: boolean;
  tipHeight: number;
  verified: boolean;
}

/** Map the node's error codes onto booth-facing language. */
export function boothErrorText(error: unknown): string {
  if (error instanceof ApiError) {
    if (error.code === "DuplicateSerial") return "ballot already used";
    if (error.code === "RoundClosed") return "this round is closed";
    if (error.code === "NotEligible") return "you are not on this round's voter roll";
    if (error.code === "AlreadyIssued") return "this credential already drew a ballot";
    return `${error.code}: ${error.message}`;
  }
  return String(error);
}

export class BoothSession {
  private readonly client: ApiClient;

  round: RoundWire | null = null;
  phase: BoothPhase = "idle";
  receipt: CastReceiptWire | null = null;
  receiptCheck: ReceiptCheck | null = null;

  // Session-only secrets. These fields are the whole anonymity story:
  // they never leave this object except as documented above.
  private serial: Uint8Array | null = null;
  private blindingFactor: bigint | null = null;
  private signature: bigint | null = null;

  constructor(client: ApiClient) {
    this.client = client;
  }

  private signerKey(): PublicKey {
    if (!this.round) throw new ApiError(0, "no_round", "load a round first");
    return {
      modulus: hexToBigInt(this.round.public_key.modulus),
      exponent: BigInt(this.round.public_key.exponent),
    };
  }

  /**
   * Casting is offered while a signed token is in hand and the round is
   * open. Deliberately NOT gated on "already cast": double-spend is the
   * server's call (DuplicateSerial), and the console holds no authoritative
   * state of its own.
   */
  get castEnabled(): boolean {
    return this.signature !== null && this.round !== null && this.round.open;
  }

  async load(roundId: string): Promise<RoundWire> {
    this.round = await this.client.get<RoundWire>(`/v1/rounds/${roundId}`);
    this.phase = "loaded";
    return this.round;
  }

  /** Poll the round descriptor; a close on the server side disables casting. */
  async refreshRound(): Promise<RoundWire> {
    if (!this.round) throw new ApiError(0, "no_round", "load a round first");
    this.round = await this.client.get<RoundWire>(`/v1/rounds/${this.round.round_id}`);
    return this.round;
  }

  /** Draw the serial and blinding factor. Both stay in memory. */
  prepare(): void {
    if (!this.round) throw new ApiError(0, "no_round", "load a round first");
    this.serial = newSerial();
    this.blindingFactor = newBlindingFactor(this.signerKey());
    this.phase = "prepared";
  }

  /**
   * Issuance: send the blinded digest (and nothing else) to the signer, then
   * strip the blinding factor from the response and check the resulting
   * signature locally before trusting it.
   */
  async requestToken(): Promise<void> {
    if (!this.round || !this.serial || this.blindingFactor === null) {
      throw new ApiError(0, "not_prepared", "prepare a ballot first");
    }
    const key = this.signerKey();
    const digest = await ballotDigest(this.round.round_id, this.serial, key.modulus);
    const blinded = blind(digest, this.blindingFactor, key);
    const ballot = await this.client.post<BallotWire>(
      `/v1/rounds/${this.round.round_id}/ballots`,
      { blinded: bigIntToHex(blinded) },
    );
    const signature = unblind(hexToBigInt(ballot.signed_blind), this.blindingFactor, key);
    if (!verifySignature(digest, signature, key)) {
      throw new ApiError(0, "bad_issuance", "issued signature failed local verification");
    }
    this.signature = signature;
    this.phase = "issued";
  }

  /**
   * Cast the ballot. Deliberately unsigned: the only credential in this
   * request is the unlinkable signature on the serial itself.
   */
  async cast(option: string): Promise<CastReceiptWire> {
    if (!this.round || !this.serial || this.signature === null) {
      throw new ApiError(0, "no_token", "request a ballot token first");
    }
    if (!this.castEnabled) {
      throw new ApiError(0, "cast_disabled", "casting is disabled for this session");
    }
    this.receipt = await this.client.post<CastReceiptWire>(
      `/v1/rounds/${this.round.round_id}/votes`,
      {
        serial: bytesToHex(this.serial),
        option,
        signature: bigIntToHex(this.signature),
      },
      { signed: false },
    );
    this.phase = "cast";
    return this.receipt;
  }

  /**
   * Verify the receipt against the chain without trusting the node's word:
   * fetch the block, find the VoteCast event carrying our serial, recompute
   * its event id from content, rebuild the block's Merkle root from all
   * event ids, and compare against the header. The chain tip is fetched too
   * so the panel can show how deep the receipt is buried.
   */
  async verifyReceipt(): Promise<ReceiptCheck> {
    if (!this.receipt || !this.serial) {
      throw new ApiError(0, "no_receipt", "cast a ballot first");
    }
    const block = await this.client.get<BlockWire>(
      `/v1/chain/blocks/${this.receipt.block_height}`,
    );
    const tip = await this.client.get<ChainTipWire>("/v1/chain/tip");
    const serialHex = bytesToHex(this.serial);
    const mine = block.events.find(
      (event) => event.kind === "VoteCast" && event.payload["serial"] === serialHex,
    );
    let eventIdOk = false;
    if (mine) {
      eventIdOk = (await eventContentId(mine)) === mine.event_id;
    }
    const leaves = await Promise.all(
      block.events.map(async (event) => hexToBytes(await eventContentId(event))),
    );
    const merkleOk = (await merkleRoot(leaves)) === block.header.merkle_root;
    const check: ReceiptCheck = {
      blockHeight: this.receipt.block_height,
      eventFound: mine !== undefined,
      eventIdOk,
      merkleOk,
      tipHeight: tip.height,
      verified: mine !== undefined && eventIdOk && merkleOk && tip.height >= block.header.height,
    };
    this.receiptCheck = check;
    this.phase = check.verified ? "verified" : "verify-failed";
    return check;
  }
}
