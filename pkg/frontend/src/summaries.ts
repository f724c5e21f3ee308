/**
 * Side-by-side comparison model for regular vs diversified summaries.
 *
 * Diversified segments are displayed with their cluster-size labels in the
 * order the server produced them (non-increasing by construction); every
 * per-segment source link must resolve to a displayed evidence row.
 */

import type { SummaryPayload } from "./types.js";
import type { EvidenceRow } from "./evidence.js";
import { resolveSourceId } from "./evidence.js";

export interface Comparison {
  regular: SummaryPayload | null;
  diversified: SummaryPayload | null;
}

export function emptyComparison(): Comparison {
  return { regular: null, diversified: null };
}

export function segmentSizeLabels(summary: SummaryPayload): number[] {
  return summary.segments.map((segment) => segment.cluster_size);
}

export function sizesNonIncreasing(summary: SummaryPayload): boolean {
  const sizes = segmentSizeLabels(summary);
  return sizes.every((size, i) => i === 0 || size <= sizes[i - 1]);
}

export interface SourceLink {
  segmentIndex: number;
  sourceId: string;
  rowIndex: number | null;
}

/** All source links of a summary resolved against the evidence rows. */
export function sourceLinks(summary: SummaryPayload, rows: EvidenceRow[]): SourceLink[] {
  const links: SourceLink[] = [];
  summary.segments.forEach((segment, segmentIndex) => {
    for (const sourceId of segment.source_ids) {
      links.push({ segmentIndex, sourceId, rowIndex: resolveSourceId(rows, sourceId) });
    }
  });
  return links;
}

export function allLinksResolve(summary: SummaryPayload, rows: EvidenceRow[]): boolean {
  return sourceLinks(summary, rows).every((link) => link.rowIndex !== null);
}

/** True when both panes hold byte-identical text (the k=1 degenerate case). */
export function panesIdentical(comparison: Comparison): boolean {
  return (
    comparison.regular !== null &&
    comparison.diversified !== null &&
    comparison.regular.full_text === comparison.diversified.full_text
  );
}
