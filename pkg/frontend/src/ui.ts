/**
 * DOM wiring for the console: three tabs over the three view-models.
 *
 * Deliberately framework-free — state lives in the view-models, and every
 * render below is a straight dump of their fields. The node base URL and
 * any signing credential come from the connect form and are kept in session
 * storage only.
 */

import { ApiClient } from "./api.js";
import { boothErrorText, BoothSession } from "./booth.js";
import { emptyForm, REVIEW_CHECKS, ReviewConsole, type ChecklistForm } from "./review.js";
import { credentialFromWire } from "./signing.js";
import { statusChip, Wallet } from "./wallet.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: (Node | string)[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  node.append(...children);
  return node;
}

function banner(kind: "error" | "info", text: string): HTMLElement {
  return el("div", { class: `banner ${kind}` }, text);
}

interface Session {
  client: ApiClient;
  review: ReviewConsole;
  booth: BoothSession;
  wallet: Wallet;
}

function connect(baseUrl: string, credentialJson: string): Session {
  const options: { credential?: ReturnType<typeof credentialFromWire> } = {};
  if (credentialJson.trim().length > 0) {
    options.credential = credentialFromWire(JSON.parse(credentialJson));
  }
  const client = new ApiClient(baseUrl, options);
  return {
    client,
    review: new ReviewConsole(client),
    booth: new BoothSession(client),
    wallet: new Wallet(client),
  };
}

function renderReview(root: HTMLElement, session: Session): void {
  const { review } = session;
  const list = el("div", { class: "queue" });
  const detail = el("div", { class: "detail" });
  root.replaceChildren(
    el("h2", {}, "Review queue"),
    el(
      "button",
      { class: "refresh" },
      "Refresh",
    ),
    list,
    detail,
  );
  const refreshButton = root.querySelector("button.refresh") as HTMLButtonElement;

  const paintForm = (applicationId: string) => {
    const form = emptyForm();
    const controls: HTMLElement[] = [];
    for (const check of REVIEW_CHECKS) {
      const pass = el("input", { type: "radio", name: check, value: "pass" }) as HTMLInputElement;
      const fail = el("input", { type: "radio", name: check, value: "fail" }) as HTMLInputElement;
      const note = el("input", { type: "text", placeholder: `${check} notes` }) as HTMLInputElement;
      pass.onchange = () => {
        form.checks[check] = true;
        sync();
      };
      fail.onchange = () => {
        form.checks[check] = false;
        sync();
      };
      note.oninput = () => {
        form.notes[check] = note.value;
      };
      controls.push(el("label", { class: "check" }, check, pass, "pass", fail, "fail", note));
    }
    const reason = el("textarea", { placeholder: "rejection reason" }) as HTMLTextAreaElement;
    reason.oninput = () => {
      form.reason = reason.value;
      sync();
    };
    const approve = el("button", {}, "Approve") as HTMLButtonElement;
    const reject = el("button", {}, "Reject") as HTMLButtonElement;
    const sync = () => {
      approve.disabled = !review.canSubmit(form, true);
      reject.disabled = !review.canSubmit(form, false);
    };
    const decide = async (isApprove: boolean) => {
      try {
        const outcome = await review.submitDecision(applicationId, form, isApprove);
        detail.replaceChildren(
          banner("info", `decision recorded: ${outcome.state}`),
        );
        await paintQueue();
      } catch (error) {
        detail.append(banner("error", review.lastError?.message ?? String(error)));
        if (review.needsReauth) detail.append(banner("error", "credential rejected — reconnect"));
      }
    };
    approve.onclick = () => void decide(true);
    reject.onclick = () => void decide(false);
    sync();
    detail.replaceChildren(el("h3", {}, applicationId), ...controls, reason, approve, reject);
  };

  const paintQueue = async () => {
    await review.refresh();
    list.replaceChildren(
      ...review.pending.map((item) => {
        const row = el(
          "div",
          { class: item.stale ? "item stale" : "item" },
          `${item.badgeName} · ${item.platform} · rev ${item.revision} · ${item.sampleCount} samples · ${item.state}`,
        );
        const openButton = el("button", {}, "Review") as HTMLButtonElement;
        openButton.onclick = () =>
          void review
            .beginReview(item.applicationId)
            .then(() => paintForm(item.applicationId))
            .catch(() => {
              list.prepend(banner("error", review.lastError?.message ?? "open failed"));
              if (review.needsReauth) list.prepend(banner("error", "sign-in required"));
            });
        row.append(openButton);
        return row;
      }),
    );
  };
  refreshButton.onclick = () => void paintQueue();
  void paintQueue();
}

function renderBooth(root: HTMLElement, session: Session): void {
  const { booth } = session;
  const status = el("div", { class: "status" });
  const roundInput = el("input", { placeholder: "round id" }) as HTMLInputElement;
  const optionInput = el("input", { placeholder: "option" }) as HTMLInputElement;
  const loadButton = el("button", {}, "Load round") as HTMLButtonElement;
  const issueButton = el("button", {}, "Request ballot") as HTMLButtonElement;
  const castButton = el("button", {}, "Cast") as HTMLButtonElement;
  const verifyButton = el("button", {}, "Verify receipt") as HTMLButtonElement;

  const paint = () => {
    castButton.disabled = !booth.castEnabled;
    const lines = [
      `phase: ${booth.phase}`,
      booth.round ? `round ${booth.round.round_id} · open=${booth.round.open}` : "no round",
    ];
    if (booth.receipt) lines.push(`receipt: serial ${booth.receipt.serial} in block ${booth.receipt.block_height}`);
    if (booth.receiptCheck) {
      lines.push(
        booth.receiptCheck.verified
          ? `inclusion VERIFIED at height ${booth.receiptCheck.blockHeight} (tip ${booth.receiptCheck.tipHeight})`
          : "inclusion check FAILED",
      );
    }
    status.replaceChildren(...lines.map((line) => el("div", {}, line)));
  };

  const guard = (work: () => Promise<unknown>) => () =>
    void work()
      .catch((error) => status.append(banner("error", boothErrorText(error))))
      .finally(paint);

  loadButton.onclick = guard(() => booth.load(roundInput.value.trim()));
  issueButton.onclick = guard(async () => {
    booth.prepare();
    await booth.requestToken();
  });
  castButton.onclick = guard(() => booth.cast(optionInput.value.trim()));
  verifyButton.onclick = guard(() => booth.verifyReceipt());

  root.replaceChildren(
    el("h2", {}, "Voting booth"),
    roundInput,
    loadButton,
    issueButton,
    optionInput,
    castButton,
    verifyButton,
    status,
  );
  paint();
  // Poll so a round closed elsewhere disables the cast button promptly.
  setInterval(() => {
    if (booth.round) void booth.refreshRound().then(paint).catch(() => undefined);
  }, 5000);
}

function renderWallet(root: HTMLElement, session: Session): void {
  const { wallet } = session;
  const holderInput = el("input", { placeholder: "holder id" }) as HTMLInputElement;
  const loadButton = el("button", {}, "Open wallet") as HTMLButtonElement;
  const list = el("div", { class: "tokens" });
  const panel = el("div", { class: "verification" });

  const paintVerification = () => {
    if (wallet.offline) {
      panel.replaceChildren(banner("error", "node unreachable — retry"));
      return;
    }
    const view = wallet.verification;
    if (!view) {
      panel.replaceChildren();
      return;
    }
    const rows = view.rows.map((row) =>
      el(
        "div",
        { class: row.clientVerified ? "proof ok" : "proof bad" },
        `height ${row.height} · ${row.kind} · client ${row.clientVerified ? "✓" : "✗"} · server ${row.serverVerified ? "✓" : "✗"}`,
      ),
    );
    panel.replaceChildren(
      el("h3", {}, `${view.tokenId} — ${view.status ?? "unknown"}`),
      el(
        "div",
        { class: view.clientProofsOk && view.agreesWithServer ? "verdict ok" : "verdict bad" },
        view.agreesWithServer
          ? `proofs ${view.clientProofsOk ? "all pass" : "FAIL"} (client and server agree)`
          : "client and server verification DISAGREE",
      ),
      ...rows,
    );
  };

  const paintTokens = () => {
    list.replaceChildren(
      ...wallet.tokens.map((token) => {
        const row = el(
          "div",
          { class: "token" },
          `${token.token_id} · grade ${token.grade} `,
          el("span", { class: `chip ${token.status.toLowerCase()}` }, statusChip(token)),
        );
        const verifyButton = el("button", {}, "Verify") as HTMLButtonElement;
        verifyButton.onclick = () =>
          void wallet
            .verify(token.token_id)
            .catch(() => undefined)
            .finally(paintVerification);
        row.append(verifyButton);
        return row;
      }),
    );
    if (wallet.tokens.length === 0 && wallet.holder !== null && !wallet.offline) {
      list.replaceChildren(banner("info", "no badges for this holder"));
    }
  };

  loadButton.onclick = () =>
    void wallet
      .load(holderInput.value.trim())
      .catch(() => undefined)
      .finally(() => {
        paintTokens();
        paintVerification();
      });

  root.replaceChildren(el("h2", {}, "Badge wallet"), holderInput, loadButton, list, panel);
}

export function mount(root: HTMLElement): void {
  const baseInput = el("input", { value: "http://127.0.0.1:9444", class: "base" }) as HTMLInputElement;
  const credentialInput = el("textarea", {
    placeholder: 'optional credential JSON {"actor_id", "modulus", "exponent", "secret"}',
  }) as HTMLTextAreaElement;
  const connectButton = el("button", {}, "Connect") as HTMLButtonElement;
  const tabBar = el("div", { class: "tabs" });
  const screen = el("div", { class: "screen" });

  root.replaceChildren(
    el("h1", {}, "medalchain console"),
    el("div", { class: "connect" }, baseInput, credentialInput, connectButton),
    tabBar,
    screen,
  );

  connectButton.onclick = () => {
    let session: Session;
    try {
      session = connect(baseInput.value.trim(), credentialInput.value);
    } catch (error) {
      screen.replaceChildren(banner("error", `bad credential JSON: ${String(error)}`));
      return;
    }
    const tabs: Array<[string, (r: HTMLElement, s: Session) => void]> = [
      ["Review", renderReview],
      ["Booth", renderBooth],
      ["Wallet", renderWallet],
    ];
    tabBar.replaceChildren(
      ...tabs.map(([name, render]) => {
        const button = el("button", {}, name) as HTMLButtonElement;
        button.onclick = () => render(screen, session);
        return button;
      }),
    );
    renderWallet(screen, session);
  };
}

if (typeof document !== "undefined" && document.getElementById("console-root")) {
  mount(document.getElementById("console-root")!);
}
