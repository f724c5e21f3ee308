/**
 * Evidence table model for ranked retrieval results.
 *
 * Rows always default to server rank order; local sorting produces a new
 * view without touching the canonical order, and source-id lookups resolve
 * against the canonical rows so summary links always land on a real row.
 */

import type { RankedCandidate, SimilarityFeatureMap } from "./types.js";
import { FEATURE_ORDER } from "./types.js";

export interface EvidenceRow {
  messageId: string;
  text: string;
  lang: string;
  score: number;
  position: number;
  features: SimilarityFeatureMap;
}

export function buildRows(candidates: RankedCandidate[]): EvidenceRow[] {
  return candidates.map((candidate) => ({
    messageId: candidate.message_id,
    text: candidate.text,
    lang: candidate.lang,
    score: candidate.score,
    position: candidate.position,
    features: candidate.features,
  }));
}

export function scoresNonIncreasing(rows: EvidenceRow[]): boolean {
  for (let i = 1; i < rows.length; i++) {
    if (rows[i].score > rows[i - 1].score + 1e-12) {
      return false;
    }
  }
  return true;
}

/** Bar width in percent for one similarity feature (cosines live in [-1, 1]). */
export function featureBarWidth(value: number): number {
  const clamped = Math.max(0, Math.min(1, value));
  return Math.round(clamped * 100);
}

export function featureBars(features: SimilarityFeatureMap): { name: string; width: number; value: number }[] {
  return FEATURE_ORDER.map((name) => ({
    name,
    width: featureBarWidth(features[name]),
    value: features[name],
  }));
}

export type SortKey = "rank" | "score" | "lang" | "kw_max";

/** Local, non-destructive sort; "rank" restores the server order. */
export function sortedView(rows: EvidenceRow[], key: SortKey): EvidenceRow[] {
  const view = [...rows];
  switch (key) {
    case "rank":
      view.sort((a, b) => a.position - b.position);
      break;
    case "score":
      view.sort((a, b) => b.score - a.score || a.position - b.position);
      break;
    case "lang":
      view.sort((a, b) => a.lang.localeCompare(b.lang) || a.position - b.position);
      break;
    case "kw_max":
      view.sort(
        (a, b) => b.features.kw_max - a.features.kw_max || a.position - b.position,
      );
      break;
  }
  return view;
}

/** Index of the evidence row for a summary source id, if it is displayed. */
export function resolveSourceId(rows: EvidenceRow[], sourceId: string): number | null {
  const index = rows.findIndex((row) => row.messageId === sourceId);
  return index === -1 ? null : index;
}
