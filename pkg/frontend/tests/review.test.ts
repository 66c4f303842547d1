/**
 * Review queue against the live seeded node: list, open, decide, and the
 * form-gating and re-auth rules. The suite uses the three Trail Guide
 * applications the fixture left in Submitted state.
 */

import { beforeAll, describe, expect, inject, test } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { emptyForm, REVIEW_CHECKS, ReviewConsole } from "../src/review.js";
import { credentialFromWire } from "../src/signing.js";
import type { ApplicationWire } from "../src/types.js";
import { RequestRecorder } from "./recorder.js";
import type { Manifest } from "./global_setup.js";

const manifest: Manifest = inject("manifest");

let client: ApiClient;
let platformClient: ApiClient;
let console_: ReviewConsole;

beforeAll(() => {
  client = new ApiClient(manifest.base_url, {
    credential: credentialFromWire(manifest.authority),
  });
  platformClient = new ApiClient(manifest.base_url, {
    credential: credentialFromWire(manifest.platform),
  });
  console_ = new ReviewConsole(client);
});

describe("queue listing", () => {
  test("lists the seeded Submitted applications with badge names", async () => {
    const items = await console_.refresh();
    const ids = items.map((item) => item.applicationId);
    for (const expected of manifest.queue_applications) {
      expect(ids).toContain(expected);
    }
    const first = items.find((item) => item.applicationId === manifest.queue_applications[0])!;
    expect(first.badgeName).toBe("Trail Guide");
    expect(first.state).toBe("Submitted");
    expect(first.sampleCount).toBe(1);
    expect(first.stale).toBe(false);
  });

  test("open() returns the full wire record", async () => {
    const { application, badgeName } = await console_.open(manifest.queue_applications[0]!);
    expect(application.application_id).toBe(manifest.queue_applications[0]);
    expect(application.awarding_rules.length).toBeGreaterThan(0);
    expect(badgeName).toBe("Trail Guide");
  });
});

describe("form gating", () => {
  test("submit stays disabled until all four checks are answered", () => {
    const form = emptyForm();
    expect(console_.canSubmit(form, true)).toBe(false);
    for (const check of REVIEW_CHECKS.slice(0, 3)) form.checks[check] = true;
    expect(console_.canSubmit(form, true)).toBe(false);
    form.checks.security = true;
    expect(console_.canSubmit(form, true)).toBe(true);
  });

  test("reject without a reason → submit disabled; typing one enables it", () => {
    const form = emptyForm();
    for (const check of REVIEW_CHECKS) form.checks[check] = check === "design" ? false : true;
    expect(console_.canSubmit(form, false)).toBe(false);
    form.reason = "   ";
    expect(console_.canSubmit(form, false)).toBe(false);
    form.reason = "design notes are incomplete";
    expect(console_.canSubmit(form, false)).toBe(true);
  });

  test("an incomplete form never reaches the wire", async () => {
    const recorder = new RequestRecorder();
    const gated = new ReviewConsole(
      new ApiClient(manifest.base_url, {
        credential: credentialFromWire(manifest.authority),
        fetchImpl: recorder.fetchImpl,
      }),
    );
    const form = emptyForm();
    await expect(gated.submitDecision("irrelevant", form, true)).rejects.toMatchObject({
      code: "form_incomplete",
    });
    expect(recorder.requests.length).toBe(0);
  });
});

describe("decisions", () => {
  test("approve with all checks → item leaves queue, appears under Decided", async () => {
    const target = manifest.queue_applications[0]!;
    await console_.refresh();
    expect(console_.pending.map((i) => i.applicationId)).toContain(target);

    await console_.beginReview(target);
    const form = emptyForm();
    for (const check of REVIEW_CHECKS) {
      form.checks[check] = true;
      form.notes[check] = `${check} verified against the issuance log`;
    }
    const outcome = await console_.submitDecision(target, form, true);
    expect(outcome.state).toBe("Approved");

    expect(console_.pending.map((i) => i.applicationId)).not.toContain(target);
    expect(console_.decided.map((d) => d.applicationId)).toContain(target);
  });

  test("reject shows the reason text as entered, verbatim on the server", async () => {
    const target = manifest.queue_applications[1]!;
    await console_.beginReview(target);
    const form = emptyForm();
    for (const check of REVIEW_CHECKS) {
      form.checks[check] = check !== "compliance";
      form.notes[check] = `${check} reviewed`;
    }
    const reason = "sample awards do not match the published awarding rules";
    form.reason = reason;
    const outcome = await console_.submitDecision(target, form, false);
    expect(outcome.state).toBe("Rejected");
    expect(outcome.rejectionReason).toBe(reason);

    const onServer = await client.get<ApplicationWire>(`/v1/applications/${target}`);
    expect(onServer.state).toBe("Rejected");
    expect(onServer.rejection_reason).toBe(reason);
  });

  test("server-side rules are surfaced verbatim, not re-implemented", async () => {
    // Decide without begin_review: the node refuses the transition and the
    // console surfaces its error code untouched.
    const target = manifest.queue_applications[2]!;
    const form = emptyForm();
    for (const check of REVIEW_CHECKS) form.checks[check] = true;
    await expect(console_.submitDecision(target, form, true)).rejects.toMatchObject({
      code: "IllegalTransition",
    });
    expect(console_.lastError?.code).toBe("IllegalTransition");
  });
});

describe("authentication failures", () => {
  test("a bad credential → 401 surfaced with the re-auth flag set", async () => {
    const forged = credentialFromWire(manifest.authority);
    forged.secret = forged.secret ^ 0xffffn;
    const locked = new ReviewConsole(
      new ApiClient(manifest.base_url, { credential: forged }),
    );
    let thrown: unknown;
    try {
      await locked.beginReview(manifest.queue_applications[2]!);
    } catch (error) {
      thrown = error;
    }
    expect(thrown).toBeInstanceOf(ApiError);
    expect((thrown as ApiError).status).toBe(401);
    expect(locked.needsReauth).toBe(true);
    expect(locked.lastError?.code).toBe((thrown as ApiError).code);
  });

  test("a successful signed call clears the re-auth flag", async () => {
    const recovering = new ReviewConsole(client);
    recovering.needsReauth = true;
    await recovering.beginReview(manifest.queue_applications[2]!);
    expect(recovering.needsReauth).toBe(false);
  });
});

describe("stale flagging", () => {
  test("an item that changed server-side comes back flagged after refetch", async () => {
    // queue_applications[2] is UnderReview after the tests above; a second
    // console that rendered it earlier must flag the change on refresh.
    const watcher = new ReviewConsole(client);
    await watcher.refresh();
    const target = manifest.queue_applications[2]!;
    const before = watcher.pending.find((item) => item.applicationId === target);
    expect(before).toBeDefined();

    // Another session (here: the same credential, different console) moves
    // the application along.
    const form = emptyForm();
    for (const check of REVIEW_CHECKS) {
      form.checks[check] = true;
      form.notes[check] = "ok";
    }
    await console_.submitDecision(target, form, true);

    const after = await watcher.refresh();
    const afterIds = after.map((item) => item.applicationId);
    expect(afterIds).not.toContain(target);

    // And an item whose state changed while still listed is flagged stale:
    // drive one application Submitted → UnderReview between two refreshes.
    const probe = new ReviewConsole(client);
    const fresh = await platformClient.post<ApplicationWire>("/v1/applications", {
      definition_id: manifest.trail_definition,
      awarding_rules: "Bronze for volunteer patrol shifts.",
      sample_awards: [],
      voting_data: "",
    });
    expect(fresh.state).toBe("Submitted");
    await probe.refresh();
    expect(
      probe.pending.find((item) => item.applicationId === fresh.application_id)?.stale,
    ).toBe(false);
    await client.post(`/v1/applications/${fresh.application_id}/review`, {});
    const flagged = await probe.refresh();
    const item = flagged.find((entry) => entry.applicationId === fresh.application_id);
    expect(item?.state).toBe("UnderReview");
    expect(item?.stale).toBe(true);
  });
});
