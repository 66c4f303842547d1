/**
 * View-model for the holder's badge wallet.
 *
 * Listing is a plain read; verification is adversarial. For every inclusion
 * proof the node returns, the wallet recomputes the event id from the event's
 * content and folds the sibling path itself, then compares its verdict with
 * the server's per-proof flag. A node that lies about verification shows up
 * as a disagreement, not a green check.
 */

import { ApiError, type ApiClient } from "./api.js";
import { hexToBytes } from "./bigint.js";
import { eventContentId, verifyProof } from "./merkle.js";
import type { TokenWire, VerifyReportWire } from "./types.js";

/** One rendered proof row in the verification panel. */
export interface ProofRow {
  height: number;
  kind: string;
  serverVerified: boolean;
  clientEventIdOk: boolean;
  clientProofOk: boolean;
  clientVerified: boolean;
}

export interface VerificationView {
  tokenId: string;
  exists: boolean;
  status: string | null;
  certified: boolean;
  rows: ProofRow[];
  /** The node's own overall verdict. */
  serverProofsOk: boolean;
  /** Our recomputed overall verdict. */
  clientProofsOk: boolean;
  /** True when every per-proof verdict and the overall verdict coincide. */
  agreesWithServer: boolean;
}

/** Status chip text is the wire status verbatim; there is no local mapping to drift. */
export function statusChip(token: TokenWire): string {
  return token.status;
}

export class Wallet {
  private readonly client: ApiClient;

  holder: string | null = null;
  tokens: TokenWire[] = [];
  /** Set when the node is unreachable; the UI shows a retry banner. */
  offline = false;
  verification: VerificationView | null = null;

  constructor(client: ApiClient) {
    this.client = client;
  }

  /** Load a holder's tokens. An unknown holder is an empty wallet, not an error. */
  async load(holder: string): Promise<TokenWire[]> {
    this.holder = holder;
    try {
      const listing = await this.client.get<{ tokens: TokenWire[] }>(
        `/v1/holders/${holder}/tokens`,
      );
      this.tokens = listing.tokens;
      this.offline = false;
      return this.tokens;
    } catch (error) {
      if (error instanceof ApiError && error.status === 0) {
        this.offline = true;
        this.tokens = [];
      }
      throw error;
    }
  }

  /**
   * Verify one token. Any transport failure clears the previous result —
   * a wallet must never keep showing "verified" from before the outage.
   */
  async verify(tokenId: string): Promise<VerificationView> {
    let report: VerifyReportWire;
    try {
      report = await this.client.get<VerifyReportWire>(`/v1/tokens/${tokenId}/verify`);
      this.offline = false;
    } catch (error) {
      this.verification = null;
      if (error instanceof ApiError && error.status === 0) this.offline = true;
      throw error;
    }
    const rows: ProofRow[] = [];
    for (const entry of report.inclusion_proofs ?? []) {
      const recomputedId = await eventContentId(entry.event);
      const clientEventIdOk = recomputedId === entry.event.event_id;
      const clientProofOk = await verifyProof(recomputedId, entry.proof, entry.root);
      rows.push({
        height: entry.height,
        kind: entry.event.kind,
        serverVerified: entry.verified,
        clientEventIdOk,
        clientProofOk,
        clientVerified: clientEventIdOk && clientProofOk,
      });
    }
    const clientProofsOk = report.exists && rows.every((row) => row.clientVerified);
    const serverProofsOk = report.proofs_ok ?? false;
    const view: VerificationView = {
      tokenId,
      exists: report.exists,
      status: report.status ?? null,
      certified: report.certified,
      rows,
      serverProofsOk,
      clientProofsOk,
      agreesWithServer:
        clientProofsOk === serverProofsOk &&
        rows.every((row) => row.clientVerified === row.serverVerified),
    };
    this.verification = view;
    return view;
  }
}
