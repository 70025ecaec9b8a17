import { describe, expect, it } from "vitest";

import { BADGE_LEVELS, badgeFor } from "../src/badges.js";
import { h, renderToString } from "../src/vdom.js";

describe("deviation badges", () => {
  it("maps every level and renders all four distinctly", () => {
    const rendered = BADGE_LEVELS.map((level) => {
      const badge = badgeFor(level);
      return renderToString(h("span", { class: badge.className }, badge.label));
    });

    expect(new Set(rendered).size).toBe(4);
    expect(rendered).toMatchInlineSnapshot(`
      [
        "<span class="badge badge-below">below typical</span>",
        "<span class="badge badge-typical">typical</span>",
        "<span class="badge badge-above">above typical</span>",
        "<span class="badge badge-none">no baseline yet</span>",
      ]
    `);
  });

  it("labels and classes are unique per level", () => {
    const badges = BADGE_LEVELS.map(badgeFor);
    expect(new Set(badges.map((b) => b.label)).size).toBe(4);
    expect(new Set(badges.map((b) => b.className)).size).toBe(4);
  });

  it("rejects levels outside the contract", () => {
    expect(() => badgeFor("wild" as never)).toThrow(/unknown deviation level/);
  });
});
