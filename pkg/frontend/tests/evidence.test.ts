import { describe, expect, it } from "vitest";

import {
  buildRows,
  featureBarWidth,
  featureBars,
  resolveSourceId,
  scoresNonIncreasing,
  sortedView,
} from "../src/evidence.js";
import type { RankedCandidate } from "../src/types.js";

function candidate(
  id: string,
  score: number,
  position: number,
  lang = "aa",
  kwMax = 0.5,
): RankedCandidate {
  return {
    message_id: id,
    text: `text of ${id}`,
    lang,
    score,
    position,
    features: {
      kw_avg: kwMax / 2,
      kw_max: kwMax,
      tpl_avg: 0.1,
      tpl_max: 0.2,
      proto_avg: 0.3,
      proto_max: 0.4,
    },
  };
}

const SERVER_ORDER = [
  candidate("m1", 0.9, 0, "aa", 0.8),
  candidate("m2", 0.7, 1, "cc", 0.9),
  candidate("m3", 0.7, 2, "bb", 0.2),
  candidate("m4", 0.1, 3, "aa", 0.4),
];

describe("evidence table", () => {
  it("preserves server rank order by default", () => {
    const rows = buildRows(SERVER_ORDER);
    expect(rows.map((r) => r.messageId)).toEqual(["m1", "m2", "m3", "m4"]);
    expect(scoresNonIncreasing(rows)).toBe(true);
  });

  it("flags out-of-order scores", () => {
    const rows = buildRows([candidate("a", 0.2, 0), candidate("b", 0.9, 1)]);
    expect(scoresNonIncreasing(rows)).toBe(false);
  });

  it("local sorting never mutates the canonical order", () => {
    const rows = buildRows(SERVER_ORDER);
    const byLang = sortedView(rows, "lang");
    expect(byLang.map((r) => r.lang)).toEqual(["aa", "aa", "bb", "cc"]);
    expect(rows.map((r) => r.messageId)).toEqual(["m1", "m2", "m3", "m4"]);
    const restored = sortedView(sortedView(rows, "kw_max"), "rank");
    expect(restored.map((r) => r.messageId)).toEqual(["m1", "m2", "m3", "m4"]);
  });

  it("renders similarity features as clamped percentage bars", () => {
    expect(featureBarWidth(0.733)).toBe(73);
    expect(featureBarWidth(-0.4)).toBe(0);
    expect(featureBarWidth(1.7)).toBe(100);
    const bars = featureBars(SERVER_ORDER[0].features);
    expect(bars.map((b) => b.name)).toEqual([
      "kw_avg", "kw_max", "tpl_avg", "tpl_max", "proto_avg", "proto_max",
    ]);
  });

  it("resolves source ids to row indices", () => {
    const rows = buildRows(SERVER_ORDER);
    expect(resolveSourceId(rows, "m3")).toBe(2);
    expect(resolveSourceId(rows, "ghost")).toBeNull();
  });
});
