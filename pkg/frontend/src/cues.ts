/**
 * The day view: one card per cue, grouped by window in start order, with
 * deviation badges, the social daily summary, self-reported emotions,
 * and the per-window location timeline.
 *
 * Teachers get an annotation composer under each cue. Submitting posts
 * and refreshes just this view (no page reload); a rejected post shows
 * an inline error and keeps the composed text. Load failures raise a
 * non-blocking banner with a retry button over whatever rendered last.
 */

import { ApiClient, ApiError, Cue, SelfReport } from "./api.js";
import { badgeFor } from "./badges.js";
import { Poller, Scheduler, intervalScheduler } from "./poller.js";
import { VNode, h, on } from "./vdom.js";

export interface CueViewModel {
  cueKey: string;
  kind: Cue["kind"];
  windowId: string;
  classId: string | null;
  timeLabel: string;
  valueDisplay: string;
  badgeLabel: string;
  badgeClass: string;
  lowConfidence: boolean;
  location: string;
  annotations: { id: string; teacher: string; text: string }[];
}

export function formatTime(t: number, timezone: string): string {
  return new Intl.DateTimeFormat("en-GB", {
    timeZone: timezone, hour: "2-digit", minute: "2-digit", hour12: false,
  }).format(new Date(t * 1000));
}

export function valueDisplay(cue: Cue): string {
  if (cue.value === null) return "no data";
  switch (cue.kind) {
    case "verbal":
      return `${Math.round(cue.value * 100)}% of class seconds voiced`;
    case "physical":
      return `${cue.value.toFixed(3)} mean motion count`;
    case "social":
      return `${cue.distinct_peers ?? 0} peers, ` +
        `${cue.copresence_minutes ?? 0} min together`;
  }
}

export function cueViewModel(cue: Cue, timezone: string): CueViewModel {
  const badge = badgeFor(cue.deviation.level);
  return {
    cueKey: cue.cue_key,
    kind: cue.kind,
    windowId: cue.window_id,
    classId: cue.class_id,
    timeLabel: `${formatTime(cue.window_start, timezone)}-` +
      `${formatTime(cue.window_end, timezone)}`,
    valueDisplay: valueDisplay(cue),
    badgeLabel: badge.label,
    badgeClass: badge.className,
    lowConfidence: cue.low_confidence,
    location: cue.location,
    annotations: cue.annotations.map((a) => ({
      id: a.id, teacher: a.teacher, text: a.text,
    })),
  };
}

interface ComposerState {
  text: string;
  error: string | null;
  busy: boolean;
}

export class DayView {
  private cues: Cue[] = [];
  private reports: SelfReport[] = [];
  private banner: string | null = null;
  private loaded = false;
  private composers = new Map<string, ComposerState>();
  readonly poller: Poller;

  constructor(
    private readonly api: ApiClient,
    readonly child: string,
    readonly date: string,
    private readonly role: "teacher" | "parent",
    private readonly timezone: string,
    private readonly teacherName = "teacher",
    pollMs = 2000,
    scheduler: Scheduler = intervalScheduler,
    private readonly onChange: () => void = () => {},
  ) {
    this.poller = new Poller(() => this.load(), pollMs, scheduler);
  }

  async load(): Promise<void> {
    try {
      const [cues, reports] = await Promise.all([
        this.api.getCues(this.child, this.date),
        this.api.getSelfReports(this.child, this.date),
      ]);
      this.cues = cues;
      this.reports = reports;
      this.loaded = true;
      this.banner = null;
    } catch (err) {
      this.banner = err instanceof ApiError
        ? `could not load the day: ${err.errorName}`
        : "could not reach the service";
    }
    this.onChange();
  }

  composer(cueKey: string): ComposerState {
    let state = this.composers.get(cueKey);
    if (!state) {
      state = { text: "", error: null, busy: false };
      this.composers.set(cueKey, state);
    }
    return state;
  }

  setComposerText(cueKey: string, text: string): void {
    this.composer(cueKey).text = text;
    this.onChange();
  }

  async submitAnnotation(cueKey: string): Promise<void> {
    const state = this.composer(cueKey);
    if (!state.text.trim() || state.busy) return;
    state.busy = true;
    state.error = null;
    try {
      await this.api.postAnnotation(cueKey, this.teacherName, state.text);
      state.text = "";
      await this.load(); // refreshes the cue in place; composed text already cleared
    } catch (err) {
      state.error = err instanceof ApiError
        ? `${err.errorName}: ${err.detail}` : "post failed";
      // the composed text stays for another attempt
    } finally {
      state.busy = false;
    }
    this.onChange();
  }

  viewModels(): CueViewModel[] {
    return this.cues.map((cue) => cueViewModel(cue, this.timezone));
  }

  render(): VNode {
    const children: (VNode | string)[] = [];
    if (this.banner !== null) {
      children.push(h("div", { class: "banner", "data-testid": "banner" },
        this.banner, " ",
        on(h("button", { "data-testid": "retry" }, "retry"),
          "click", () => void this.load()),
      ));
    }
    if (!this.loaded) {
      children.push(h("p", { class: "empty" }, "loading..."));
      return h("section", { class: "day-view" }, children);
    }
    if (this.cues.length === 0) {
      children.push(h("p", { class: "empty", "data-testid": "no-data" },
        "no data for this day"));
      return h("section", { class: "day-view" }, children);
    }

    const models = this.viewModels();
    const social = models.filter((m) => m.kind === "social");
    const windows = models.filter((m) => m.kind !== "social");

    for (const model of social) {
      children.push(this.renderCue(model, "social-summary"));
    }
    children.push(h("div", { class: "cue-list" },
      windows.map((model) => this.renderCue(model, "cue-card"))));

    children.push(h("div", { class: "timeline", "data-testid": "location-timeline" },
      h("h3", {}, "whereabouts"),
      models.map((m) => h("span", { class: "loc" },
        `${m.timeLabel} ${m.location}`)),
    ));

    children.push(h("div", { class: "emotions", "data-testid": "selfreports" },
      h("h3", {}, "self-reported feelings"),
      this.reports.length === 0
        ? h("span", { class: "empty" }, "none today")
        : this.reports.map((r) => h("span", { class: "emotion" },
          `${formatTime(r.t, this.timezone)} ${r.label}`)),
    ));

    return h("section", { class: "day-view" }, children);
  }

  private renderCue(model: CueViewModel, cardClass: string): VNode {
    const title = model.kind === "social"
      ? "social day summary"
      : `${model.windowId}${model.classId ? ` (${model.classId})` : ""} ${model.timeLabel}`;
    const parts: (VNode | string)[] = [
      h("header", {},
        h("span", { class: "kind" }, model.kind),
        h("span", { class: "title" }, title),
        h("span", { class: model.badgeClass, "data-testid": `badge-${model.cueKey}` },
          model.badgeLabel),
      ),
      h("p", { class: "value" }, model.valueDisplay),
    ];
    if (model.lowConfidence) {
      parts.push(h("p", { class: "low-confidence" }, "low confidence: sparse data"));
    }
    if (model.annotations.length > 0) {
      parts.push(h("ul", { class: "annotations" },
        model.annotations.map((a) =>
          h("li", { "data-annotation": a.id }, `${a.teacher}: ${a.text}`))));
    }
    if (this.role === "teacher") {
      parts.push(this.renderComposer(model.cueKey));
    }
    return h("article", {
      class: cardClass,
      "data-testid": `cue-${model.cueKey}`,
    }, parts);
  }

  private renderComposer(cueKey: string): VNode {
    const state = this.composer(cueKey);
    const input = on(h("input", {
      type: "text",
      placeholder: "annotate for the parent...",
      value: state.text,
      "data-testid": `composer-${cueKey}`,
    }), "input", (value) => this.setComposerText(cueKey, value ?? ""));

    const attrs: Record<string, string> = { "data-testid": `submit-${cueKey}` };
    if (!state.text.trim() || state.busy) attrs["disabled"] = "disabled";
    const button = on(h("button", attrs, "annotate"),
      "click", () => void this.submitAnnotation(cueKey));

    const parts: (VNode | string)[] = [input, button];
    if (state.error) {
      parts.push(h("span", { class: "error", "data-testid": `error-${cueKey}` },
        state.error));
    }
    return h("div", { class: "composer" }, parts);
  }
}
