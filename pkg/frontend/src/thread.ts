/**
 * The teacher <-> parent message thread for one child.
 *
 * Polls the service with a seq cursor (2 s default), renders role-labeled
 * bubbles in (t, id) order, and posts optimistically: a sent message shows
 * immediately as pending, is reconciled when the poll returns it from the
 * server, and turns into a retry affordance if the post fails. Rendering
 * is a pure function of state, so unchanged polls re-render identically.
 */

import { ApiClient, ApiError, Message } from "./api.js";
import { Poller, Scheduler, intervalScheduler } from "./poller.js";
import { VNode, h, on } from "./vdom.js";

export interface PendingEntry {
  localId: string;
  serverId: string | null;
  text: string;
  failed: boolean;
}

export class ThreadView {
  private confirmed: Message[] = [];
  private pending: PendingEntry[] = [];
  private seen = new Set<string>();
  private sinceSeq = 0;
  private composerText = "";
  private localCounter = 0;
  readonly poller: Poller;

  constructor(
    private readonly api: ApiClient,
    readonly child: string,
    private readonly role: "teacher" | "parent",
    pollMs = 2000,
    scheduler: Scheduler = intervalScheduler,
    private readonly onChange: () => void = () => {},
  ) {
    this.poller = new Poller(() => this.poll(), pollMs, scheduler);
  }

  /** Fetch messages after the cursor and fold them into the thread. */
  async poll(): Promise<void> {
    const batch = await this.api.getMessages(
      this.child, this.sinceSeq > 0 ? this.sinceSeq : undefined);
    if (batch.length === 0) return;
    let changed = false;
    for (const message of batch) {
      this.sinceSeq = Math.max(this.sinceSeq, message.seq);
      if (this.seen.has(message.id)) continue;
      this.seen.add(message.id);
      this.confirmed.push(message);
      changed = true;
      // reconcile: the server echoed an optimistic post back to us
      this.pending = this.pending.filter((p) => p.serverId !== message.id);
    }
    if (changed) {
      this.confirmed.sort((a, b) =>
        a.t - b.t || (a.id < b.id ? -1 : a.id > b.id ? 1 : 0));
      this.onChange();
    }
  }

  setComposer(text: string): void {
    this.composerText = text;
    this.onChange();
  }

  async send(): Promise<void> {
    const text = this.composerText.trim();
    if (!text) return;
    const entry: PendingEntry = {
      localId: `local-${++this.localCounter}`,
      serverId: null,
      text,
      failed: false,
    };
    this.pending.push(entry);
    this.composerText = "";
    this.onChange();
    await this.deliver(entry);
  }

  async retry(localId: string): Promise<void> {
    const entry = this.pending.find((p) => p.localId === localId);
    if (!entry || !entry.failed) return;
    entry.failed = false;
    this.onChange();
    await this.deliver(entry);
  }

  private async deliver(entry: PendingEntry): Promise<void> {
    try {
      const ack = await this.api.postMessage(this.child, entry.text);
      entry.serverId = ack.id;
      await this.poll(); // pick the confirmed copy up right away
    } catch (err) {
      entry.failed = true; // never silently dropped: shown with a retry button
      void err;
    }
    this.onChange();
  }

  messages(): Message[] {
    return [...this.confirmed];
  }

  pendingEntries(): PendingEntry[] {
    return [...this.pending];
  }

  render(): VNode {
    const bubbles: VNode[] = this.confirmed.map((message) =>
      h("div", {
        class: `bubble ${message.sender_role === this.role ? "mine" : "theirs"}`,
        "data-message": message.id,
      },
        h("span", { class: "who" }, message.sender_role),
        h("span", { class: "text" }, message.text),
      ));

    for (const entry of this.pending) {
      const parts: (VNode | string)[] = [
        h("span", { class: "who" }, this.role),
        h("span", { class: "text" }, entry.text),
      ];
      if (entry.failed) {
        parts.push(h("span", { class: "failed" }, "not delivered"));
        parts.push(on(
          h("button", { "data-testid": `retry-${entry.localId}` }, "retry"),
          "click", () => void this.retry(entry.localId)));
      } else {
        parts.push(h("span", { class: "pending" }, "sending..."));
      }
      bubbles.push(h("div", {
        class: "bubble mine pending-bubble",
        "data-pending": entry.localId,
      }, parts));
    }

    const input = on(h("input", {
      type: "text",
      placeholder: `message as ${this.role}...`,
      value: this.composerText,
      "data-testid": "thread-composer",
    }), "input", (value) => this.setComposer(value ?? ""));
    const sendAttrs: Record<string, string> = { "data-testid": "thread-send" };
    if (!this.composerText.trim()) sendAttrs["disabled"] = "disabled";
    const send = on(h("button", sendAttrs, "send"),
      "click", () => void this.send());

    return h("section", { class: "thread" },
      h("div", { class: "bubbles" }, bubbles),
      h("div", { class: "composer" }, input, send),
    );
  }
}
