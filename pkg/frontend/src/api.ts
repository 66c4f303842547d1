/**
 * Minimal fetch client for a node's /v1 interface.
 *
 * Mutations are signed with the configured credential; reads are anonymous.
 * The fetch implementation is injectable so tests can record or sever the
 * wire without monkey-patching globals.
 */

import { ACTOR_HEADER, SIGNATURE_HEADER, signRequest, type Credential } from "./signing.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** A structured failure from the node (or from transport). */
export class ApiError extends Error {
  readonly status: number;
  readonly code: string;

  constructor(status: number, code: string, message: string) {
    super(message);
    this.name = "ApiError";
    this.status = status;
    this.code = code;
  }
}

export interface ApiClientOptions {
  credential?: Credential;
  fetchImpl?: FetchLike;
}

export class ApiClient {
  readonly baseUrl: string;
  credential?: Credential;
  private readonly fetchImpl: FetchLike;

  /** Tip hash/height from the most recent response's chain headers. */
  lastChainTip: string | null = null;
  lastChainHeight: number | null = null;

  constructor(baseUrl: string, options: ApiClientOptions = {}) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    this.credential = options.credential;
    this.fetchImpl = options.fetchImpl ?? ((input, init) => fetch(input, init));
  }

  private captureChainHeaders(response: Response): void {
    const tip = response.headers.get("X-Chain-Tip");
    const height = response.headers.get("X-Chain-Height");
    if (tip !== null) this.lastChainTip = tip;
    if (height !== null) this.lastChainHeight = Number(height);
  }

  private async decode<T>(response: Response): Promise<T> {
    this.captureChainHeaders(response);
    let parsed: unknown = null;
    const text = await response.text();
    if (text.length > 0) {
      try {
        parsed = JSON.parse(text);
      } catch {
        parsed = null;
      }
    }
    if (!response.ok) {
      const envelope = (parsed ?? {}) as { error?: string; message?: string };
      throw new ApiError(
        response.status,
        envelope.error ?? `http_${response.status}`,
        envelope.message ?? `request failed with status ${response.status}`,
      );
    }
    return parsed as T;
  }

  async get<T>(path: string): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(this.baseUrl + path, { method: "GET" });
    } catch (cause) {
      throw new ApiError(0, "network_unreachable", String(cause));
    }
    return this.decode<T>(response);
  }

  /**
   * POST a JSON payload. Signed with the client credential unless the
   * endpoint is deliberately anonymous (ballot casting).
   */
  async post<T>(path: string, payload: unknown, options: { signed?: boolean } = {}): Promise<T> {
    const signed = options.signed ?? true;
    // The signature covers these exact bytes, so the body is serialized
    // exactly once and reused for both the digest and the wire.
    const body = JSON.stringify(payload);
    const headers: Record<string, string> = { "content-type": "application/json" };
    if (signed) {
      if (!this.credential) {
        throw new ApiError(0, "no_credential", "this operation requires a signing credential");
      }
      headers[ACTOR_HEADER] = this.credential.actorId;
      headers[SIGNATURE_HEADER] = await signRequest(this.credential, "POST", path, body);
    }
    let response: Response;
    try {
      response = await this.fetchImpl(this.baseUrl + path, { method: "POST", headers, body });
    } catch (cause) {
      throw new ApiError(0, "network_unreachable", String(cause));
    }
    return this.decode<T>(response);
  }
}
