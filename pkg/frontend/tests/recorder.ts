/**
 * A fetch wrapper that records every outbound request so tests can assert
 * what did — and, more importantly, what did NOT — leave the client.
 */

import type { FetchLike } from "../src/api.js";

export interface RecordedRequest {
  method: string;
  url: string;
  headers: Record<string, string>;
  body: string;
}

export class RequestRecorder {
  readonly requests: RecordedRequest[] = [];

  readonly fetchImpl: FetchLike = async (input, init) => {
    const headers: Record<string, string> = {};
    for (const [key, value] of Object.entries(init?.headers ?? {})) {
      headers[key.toLowerCase()] = String(value);
    }
    this.requests.push({
      method: init?.method ?? "GET",
      url: input,
      headers,
      body: typeof init?.body === "string" ? init.body : "",
    });
    return fetch(input, init);
  };

  /** Every byte the wire ever saw, one string per request, for needle checks. */
  transcripts(): string[] {
    return this.requests.map(
      (r) => `${r.method} ${r.url} ${JSON.stringify(r.headers)} ${r.body}`,
    );
  }

  /** True if the needle appears anywhere in any recorded request. */
  everSent(needle: string): boolean {
    return this.transcripts().some((t) => t.includes(needle));
  }

  /** Requests whose transcript contains the needle. */
  requestsSending(needle: string): RecordedRequest[] {
    return this.requests.filter((r) =>
      `${r.method} ${r.url} ${JSON.stringify(r.headers)} ${r.body}`.includes(needle),
    );
  }
}
