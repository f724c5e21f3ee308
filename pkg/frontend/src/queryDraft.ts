/**
 * Draft state for the structured-query editor.
 *
 * Mirrors the server's query shape plus a dirty flag and the saved server
 * id. Saving is disabled while every component is empty; a save clears the
 * dirty flag and records the id the server assigned.
 */

import type { QueryPayload } from "./types.js";

export interface QueryDraft {
  serverId: string | null;
  category: string;
  keywords: string[];
  templates: string[];
  prototypes: string[];
  dirty: boolean;
}

export function emptyDraft(category = "Weather"): QueryDraft {
  return {
    serverId: null,
    category,
    keywords: [],
    templates: [],
    prototypes: [],
    dirty: false,
  };
}

export function draftFromServer(
  id: string,
  payload: Omit<QueryPayload, "id">,
): QueryDraft {
  return {
    serverId: id,
    category: payload.category,
    keywords: [...payload.keywords],
    templates: [...payload.templates],
    prototypes: [...payload.prototypes],
    dirty: false,
  };
}

/** One entry per line; surrounding whitespace trimmed, blanks dropped. */
export function parseComponent(text: string): string[] {
  return text
    .split("\n")
    .map((line) => line.trim())
    .filter((line) => line.length > 0);
}

export function setComponent(
  draft: QueryDraft,
  component: "keywords" | "templates" | "prototypes",
  entries: string[],
): QueryDraft {
  return { ...draft, [component]: entries, dirty: true };
}

export function setCategory(draft: QueryDraft, category: string): QueryDraft {
  return { ...draft, category, dirty: true };
}

export function canSave(draft: QueryDraft): boolean {
  return (
    draft.keywords.length > 0 ||
    draft.templates.length > 0 ||
    draft.prototypes.length > 0
  );
}

export function toPayload(draft: QueryDraft): QueryPayload {
  const payload: QueryPayload = {
    category: draft.category,
    keywords: draft.keywords,
    templates: draft.templates,
    prototypes: draft.prototypes,
  };
  if (draft.serverId) {
    payload.id = draft.serverId;
  }
  return payload;
}

export function markSaved(draft: QueryDraft, serverId: string): QueryDraft {
  return { ...draft, serverId, dirty: false };
}
