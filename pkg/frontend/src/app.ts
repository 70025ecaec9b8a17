/**
 * Browser shell: login screen, then the teacher or parent console.
 *
 * The role token typed at login decides everything else; the console
 * never asks the service for anything but the documented /api/v1 routes.
 */

import { ApiClient, FetchLike, Meta } from "./api.js";
import { DayView } from "./cues.js";
import { ThreadView } from "./thread.js";
import { VNode, h, mount, on } from "./vdom.js";

type Role = "teacher" | "parent";

interface Session {
  api: ApiClient;
  role: Role;
  meta: Meta;
}

function todayIso(): string {
  return new Date().toISOString().slice(0, 10);
}

export class App {
  private session: Session | null = null;
  private loginError: string | null = null;
  private tokenInput = "";
  private roleInput: Role = "teacher";
  private child: string | null = null;
  private date = todayIso();
  private day: DayView | null = null;
  private thread: ThreadView | null = null;

  constructor(
    private readonly container: Element,
    private readonly fetchLike: FetchLike = (url, init) =>
      fetch(url, init as RequestInit),
  ) {}

  start(): void {
    this.draw();
  }

  private draw(): void {
    mount(this.container, this.render());
  }

  private async login(): Promise<void> {
    const api = new ApiClient("", this.tokenInput.trim(), this.fetchLike);
    try {
      const meta = await api.getMeta();
      this.session = { api, role: this.roleInput, meta };
      this.loginError = null;
      const first = meta.children[0];
      if (first) this.selectChild(first.child_id);
    } catch {
      this.loginError = "could not reach the service";
    }
    this.draw();
  }

  private selectChild(child: string): void {
    if (!this.session) return;
    this.day?.poller.stop();
    this.thread?.poller.stop();
    this.child = child;
    this.day = new DayView(
      this.session.api, child, this.date, this.session.role,
      this.session.meta.timezone, "teacher",
      2000, undefined, () => this.draw());
    this.thread = new ThreadView(
      this.session.api, child, this.session.role,
      2000, undefined, () => this.draw());
    void this.day.load();
    void this.thread.poll();
    this.day.poller.start();
    this.thread.poller.start();
    this.draw();
  }

  private setDate(date: string): void {
    this.date = date;
    if (this.child) this.selectChild(this.child);
  }

  private render(): VNode {
    if (!this.session) return this.renderLogin();
    const meta = this.session.meta;
    return h("main", { class: `console role-${this.session.role}` },
      h("header", { class: "top" },
        h("h1", {}, meta.school_name),
        h("span", { class: "role-tag" }, `${this.session.role} view`),
      ),
      h("nav", { class: "picker" },
        h("label", {}, "child "),
        ...meta.children.map((c) => {
          const attrs: Record<string, string> = { class: "child-tab" };
          if (c.child_id === this.child) attrs["class"] += " active";
          return on(h("button", attrs, c.child_id),
            "click", () => this.selectChild(c.child_id));
        }),
        h("label", {}, " date "),
        on(h("input", { type: "date", value: this.date }),
          "change", (value) => this.setDate(value ?? this.date)),
      ),
      h("div", { class: "columns" },
        this.day ? this.day.render() : h("div", {}),
        this.thread ? this.thread.render() : h("div", {}),
      ),
    );
  }

  private renderLogin(): VNode {
    return h("main", { class: "login" },
      h("h1", {}, "awareness console"),
      h("p", {}, "enter your role token"),
      on(h("input", { type: "password", placeholder: "token",
                      value: this.tokenInput }),
        "input", (value) => { this.tokenInput = value ?? ""; }),
      on(h("select", {},
        h("option", { value: "teacher" }, "teacher"),
        h("option", { value: "parent" }, "parent")),
        "change", (value) => { this.roleInput = value === "parent" ? "parent" : "teacher"; }),
      on(h("button", {}, "sign in"), "click", () => void this.login()),
      this.loginError ? h("p", { class: "error" }, this.loginError) : "",
    );
  }
}

declare global {
  interface Window {
    sensemeApp?: App;
  }
}

if (typeof document !== "undefined") {
  const root = document.getElementById("app");
  if (root) {
    const app = new App(root);
    window.sensemeApp = app;
    app.start();
  }
}
