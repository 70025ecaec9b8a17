/**
 * Deviation-level badges. The mapping is total over the four levels the
 * service can report, and each level gets a visually distinct class.
 */

import type { Deviation } from "./api.js";

export interface Badge {
  label: string;
  className: string;
}

const BADGES: Record<Deviation["level"], Badge> = {
  below: { label: "below typical", className: "badge badge-below" },
  typical: { label: "typical", className: "badge badge-typical" },
  above: { label: "above typical", className: "badge badge-above" },
  no_baseline: { label: "no baseline yet", className: "badge badge-none" },
};

export const BADGE_LEVELS = Object.keys(BADGES) as Deviation["level"][];

export function badgeFor(level: Deviation["level"]): Badge {
  const badge = BADGES[level];
  if (!badge) throw new Error(`unknown deviation level: ${level}`);
  return badge;
}
