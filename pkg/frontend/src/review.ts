/**
 * View-model for the authority's review queue.
 *
 * The console never owns certification state: every item on screen is a
 * direct rendering of the latest server response, and a refetch that shows
 * an item changed under us flags it stale instead of papering over the
 * difference. Submission is gated locally only on form completeness; every
 * other rule is enforced by the node and its error codes are surfaced
 * verbatim.
 */

import { ApiError, type ApiClient } from "./api.js";
import type { ApplicationWire, DefinitionWire } from "./types.js";

/** The four review checks, in the order the form renders them. */
export const REVIEW_CHECKS = ["compliance", "design", "platform", "security"] as const;
export type ReviewCheck = (typeof REVIEW_CHECKS)[number];

/** Tri-state checklist: null means "not answered yet". */
export interface ChecklistForm {
  checks: Record<ReviewCheck, boolean | null>;
  notes: Record<ReviewCheck, string>;
  reason: string;
}

export function emptyForm(): ChecklistForm {
  return {
    checks: { compliance: null, design: null, platform: null, security: null },
    notes: { compliance: "", design: "", platform: "", security: "" },
    reason: "",
  };
}

/** One row in the queue, summarizing an application for the list view. */
export interface ReviewQueueItem {
  applicationId: string;
  badgeName: string;
  platform: string;
  revision: number;
  sampleCount: number;
  state: string;
  rejectionReason: string;
  votingData: string;
  /** Set after a refetch shows the item changed since it was rendered. */
  stale: boolean;
}

export interface DecisionOutcome {
  applicationId: string;
  state: string;
  rejectionReason: string;
}

function summarize(wire: ApplicationWire, badgeName: string): ReviewQueueItem {
  return {
    applicationId: wire.application_id,
    badgeName,
    platform: wire.platform,
    revision: wire.revision,
    sampleCount: wire.sample_awards.length,
    state: wire.state,
    rejectionReason: wire.rejection_reason,
    votingData: wire.voting_data,
    stale: false,
  };
}

export class ReviewConsole {
  private readonly client: ApiClient;
  private readonly badgeNames = new Map<string, string>();

  pending: ReviewQueueItem[] = [];
  decided: DecisionOutcome[] = [];
  /** Set when the node answered 401; the UI should prompt for credentials. */
  needsReauth = false;
  /** Last server error, verbatim, for the banner. */
  lastError: { code: string; message: string } | null = null;

  constructor(client: ApiClient) {
    this.client = client;
  }

  private async badgeName(definitionId: string): Promise<string> {
    const known = this.badgeNames.get(definitionId);
    if (known !== undefined) return known;
    const definition = await this.client.get<DefinitionWire>(`/v1/definitions/${definitionId}`);
    this.badgeNames.set(definitionId, definition.name);
    return definition.name;
  }

  private record(error: unknown): never {
    if (error instanceof ApiError) {
      if (error.status === 401) this.needsReauth = true;
      this.lastError = { code: error.code, message: error.message };
    }
    throw error;
  }

  /**
   * Refetch the queue. Items already rendered whose server copy changed
   * (different state or revision) come back flagged stale so the UI can
   * highlight them for one paint before settling on the fresh data.
   */
  async refresh(): Promise<ReviewQueueItem[]> {
    const previous = new Map(this.pending.map((item) => [item.applicationId, item]));
    let wires: ApplicationWire[];
    try {
      const listing = await this.client.get<{ applications: ApplicationWire[] }>(
        "/v1/applications?state=Submitted",
      );
      const underReview = await this.client.get<{ applications: ApplicationWire[] }>(
        "/v1/applications?state=UnderReview",
      );
      wires = [...listing.applications, ...underReview.applications];
    } catch (error) {
      this.record(error);
    }
    const next: ReviewQueueItem[] = [];
    for (const wire of wires) {
      const item = summarize(wire, await this.badgeName(wire.definition_id));
      const before = previous.get(item.applicationId);
      if (before && (before.state !== item.state || before.revision !== item.revision)) {
        item.stale = true;
      }
      next.push(item);
    }
    this.pending = next;
    return next;
  }

  /** Full wire record for the detail pane. */
  async open(applicationId: string): Promise<{ application: ApplicationWire; badgeName: string }> {
    try {
      const application = await this.client.get<ApplicationWire>(
        `/v1/applications/${applicationId}`,
      );
      return {
        application,
        badgeName: await this.badgeName(application.definition_id),
      };
    } catch (error) {
      this.record(error);
    }
  }

  /** Claim the application for review (Submitted → UnderReview). */
  async beginReview(applicationId: string): Promise<ApplicationWire> {
    try {
      const wire = await this.client.post<ApplicationWire>(
        `/v1/applications/${applicationId}/review`,
        {},
      );
      this.needsReauth = false;
      return wire;
    } catch (error) {
      this.record(error);
    }
  }

  /**
   * The submit button's enablement rule: every check answered, and a reason
   * typed when the decision is a rejection. Nothing else is validated here —
   * the node is the authority on everything beyond form completeness.
   */
  canSubmit(form: ChecklistForm, approve: boolean): boolean {
    const answered = REVIEW_CHECKS.every((check) => form.checks[check] !== null);
    if (!answered) return false;
    if (!approve && form.reason.trim().length === 0) return false;
    return true;
  }

  async submitDecision(
    applicationId: string,
    form: ChecklistForm,
    approve: boolean,
  ): Promise<DecisionOutcome> {
    if (!this.canSubmit(form, approve)) {
      throw new ApiError(0, "form_incomplete", "answer all four checks (and give a reason to reject)");
    }
    const review = {
      compliance_ok: form.checks.compliance === true,
      design_ok: form.checks.design === true,
      platform_ok: form.checks.platform === true,
      security_ok: form.checks.security === true,
      notes: { ...form.notes },
    };
    try {
      const wire = await this.client.post<ApplicationWire>(
        `/v1/applications/${applicationId}/decision`,
        { approve, review, rejection_reason: form.reason },
      );
      this.needsReauth = false;
      const outcome: DecisionOutcome = {
        applicationId: wire.application_id,
        state: wire.state,
        rejectionReason: wire.rejection_reason,
      };
      this.decided.push(outcome);
      await this.refresh();
      return outcome;
    } catch (error) {
      this.record(error);
    }
  }
}
