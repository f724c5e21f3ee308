/**
 * Workbench wiring: query editor, evidence table, summary comparison.
 *
 * One request slot per view keeps a single retrieval/summarization call in
 * flight; newer requests cancel stale ones. Evidence rows render in server
 * order; clicking a summary source link scrolls to and highlights its row.
 */

import { FieldError, RequestSlot, RetryableError, WorkbenchApi } from "./api.js";
import {
  buildRows,
  featureBars,
  resolveSourceId,
  scoresNonIncreasing,
  type EvidenceRow,
} from "./evidence.js";
import {
  canSave,
  draftFromServer,
  emptyDraft,
  markSaved,
  parseComponent,
  setCategory,
  setComponent,
  toPayload,
  type QueryDraft,
} from "./queryDraft.js";
import {
  emptyComparison,
  panesIdentical,
  sizesNonIncreasing,
  type Comparison,
} from "./summaries.js";
import { CATEGORIES, type SummaryPayload } from "./types.js";

const api = new WorkbenchApi("");
const rankSlot = new RequestSlot();
const summarySlot = new RequestSlot();

let draft: QueryDraft = emptyDraft();
let rows: EvidenceRow[] = [];
let comparison: Comparison = emptyComparison();

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

function setBanner(text: string, kind: "error" | "info" | "" = "") {
  const banner = el<HTMLDivElement>("banner");
  banner.textContent = text;
  banner.className = kind ? `banner ${kind}` : "banner hidden";
}

function refreshSaveButton() {
  el<HTMLButtonElement>("save-query").disabled = !canSave(draft);
  el<HTMLSpanElement>("query-id").textContent = draft.serverId
    ? `saved as ${draft.serverId}${draft.dirty ? " (unsaved edits)" : ""}`
    : "not saved yet";
}

function readDraftFromForm() {
  draft = setCategory(draft, el<HTMLSelectElement>("category").value);
  for (const name of ["keywords", "templates", "prototypes"] as const) {
    draft = setComponent(draft, name, parseComponent(el<HTMLTextAreaElement>(name).value));
  }
  refreshSaveButton();
}

function writeDraftToForm() {
  el<HTMLSelectElement>("category").value = draft.category;
  el<HTMLTextAreaElement>("keywords").value = draft.keywords.join("\n");
  el<HTMLTextAreaElement>("templates").value = draft.templates.join("\n");
  el<HTMLTextAreaElement>("prototypes").value = draft.prototypes.join("\n");
  refreshSaveButton();
}

async function saveQuery() {
  readDraftFromForm();
  if (!canSave(draft)) {
    return;
  }
  try {
    const saved = await api.saveQuery(toPayload(draft));
    draft = markSaved(draft, saved.id);
    setBanner(`query saved as ${saved.id}`, "info");
    refreshSaveButton();
  } catch (error) {
    if (error instanceof FieldError) {
      el<HTMLDivElement>("query-errors").textContent = error.message;
    } else {
      setBanner(String(error), "error");
    }
  }
}

function renderEvidence() {
  const tbody = el<HTMLTableSectionElement>("evidence-body");
  tbody.replaceChildren();
  for (const row of rows) {
    const tr = document.createElement("tr");
    tr.id = `row-${row.messageId}`;
    const bars = featureBars(row.features)
      .map(
        (bar) =>
          `<div class="bar-line"><span class="bar-name">${bar.name}</span>` +
          `<span class="bar-track"><span class="bar-fill" style="width:${bar.width}%"></span></span>` +
          `<span class="bar-value">${bar.value.toFixed(3)}</span></div>`,
      )
      .join("");
    tr.innerHTML =
      `<td class="rank">${row.position + 1}</td>` +
      `<td><span class="badge">${row.lang}</span></td>` +
      `<td class="text">${escapeHtml(row.text)}</td>` +
      `<td class="score">${row.score.toFixed(4)}</td>` +
      `<td class="bars">${bars}</td>`;
    tbody.appendChild(tr);
  }
  el<HTMLSpanElement>("evidence-note").textContent = rows.length
    ? `${rows.length} rows, server order${scoresNonIncreasing(rows) ? "" : " (scores not monotone?)"}`
    : "no results yet";
}

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;");
}

async function runRetrieval() {
  if (!draft.serverId || draft.dirty) {
    setBanner("save the query before running retrieval", "error");
    return;
  }
  const eventId = el<HTMLSelectElement>("event").value;
  const k = Number(el<HTMLInputElement>("topk").value) || 10;
  setBanner("retrieving…", "info");
  try {
    const response = await rankSlot.run((signal) =>
      api.rank(draft.serverId as string, eventId, k, signal),
    );
    rows = buildRows(response.candidates);
    renderEvidence();
    setBanner(`ranked by ${response.meta.encoder}, seed ${response.meta.seed}`, "info");
  } catch (error) {
    if ((error as Error).name === "AbortError") {
      return;
    }
    if (error instanceof RetryableError) {
      setBanner("service busy; retry in a few seconds", "error");
    } else {
      setBanner(String(error), "error");
    }
  }
}

function renderSummary(pane: HTMLElement, summary: SummaryPayload | null) {
  pane.replaceChildren();
  if (!summary) {
    pane.textContent = "not generated yet";
    return;
  }
  const ordered = sizesNonIncreasing(summary);
  summary.segments.forEach((segment, index) => {
    const block = document.createElement("div");
    block.className = "segment";
    const label = document.createElement("div");
    label.className = "segment-label";
    label.textContent =
      summary.mode === "diversified"
        ? `cluster ${index + 1} · ${segment.cluster_size} messages${ordered ? "" : " (!)"} `
        : `all ${segment.cluster_size} messages`;
    const text = document.createElement("p");
    text.textContent = segment.text;
    const links = document.createElement("div");
    links.className = "links";
    for (const sourceId of segment.source_ids) {
      const link = document.createElement("a");
      link.href = `#row-${sourceId}`;
      link.textContent = sourceId;
      link.onclick = (event) => {
        event.preventDefault();
        highlightRow(sourceId);
      };
      links.appendChild(link);
    }
    block.append(label, text, links);
    pane.appendChild(block);
  });
}

function highlightRow(sourceId: string) {
  if (resolveSourceId(rows, sourceId) === null) {
    setBanner(`source ${sourceId} is not in the current evidence table`, "error");
    return;
  }
  const node = document.getElementById(`row-${sourceId}`);
  if (node) {
    document.querySelectorAll("tr.highlight").forEach((n) => n.classList.remove("highlight"));
    node.classList.add("highlight");
    node.scrollIntoView({ behavior: "smooth", block: "center" });
  }
}

async function compareSummaries() {
  if (!draft.serverId || draft.dirty) {
    setBanner("save the query and run retrieval first", "error");
    return;
  }
  const eventId = el<HTMLSelectElement>("event").value;
  const budgetRaw = Number(el<HTMLInputElement>("budget").value);
  const budget = Number.isFinite(budgetRaw) && budgetRaw >= 10 ? budgetRaw : null;
  setBanner("summarizing…", "info");
  try {
    const [regular, diversified] = await summarySlot.run((signal) =>
      Promise.all([
        api.summarize(draft.serverId as string, eventId, "regular", budget, signal),
        api.summarize(draft.serverId as string, eventId, "diversified", budget, signal),
      ]),
    );
    comparison = { regular: regular.summary, diversified: diversified.summary };
    renderSummary(el("pane-regular"), comparison.regular);
    renderSummary(el("pane-diversified"), comparison.diversified);
    setBanner(
      panesIdentical(comparison)
        ? "single cluster: both modes produced identical text"
        : "summaries ready",
      "info",
    );
  } catch (error) {
    if ((error as Error).name === "AbortError") {
      return;
    }
    if (error instanceof RetryableError) {
      setBanner("service busy; retry in a few seconds", "error");
    } else {
      setBanner(String(error), "error");
    }
  }
}

async function bootstrap() {
  const categorySelect = el<HTMLSelectElement>("category");
  for (const category of CATEGORIES) {
    const option = document.createElement("option");
    option.value = category;
    option.textContent = category;
    categorySelect.appendChild(option);
  }
  const events = await api.listEvents();
  const eventSelect = el<HTMLSelectElement>("event");
  for (const event of events.events) {
    const option = document.createElement("option");
    option.value = event.event_id;
    option.textContent = `${event.name} (${event.informative}/${event.messages} informative)`;
    eventSelect.appendChild(option);
  }
  const queries = await api.listQueries();
  const querySelect = el<HTMLSelectElement>("saved-queries");
  for (const id of Object.keys(queries.queries)) {
    const option = document.createElement("option");
    option.value = id;
    option.textContent = id;
    querySelect.appendChild(option);
  }
  querySelect.onchange = () => {
    const id = querySelect.value;
    if (id && queries.queries[id]) {
      draft = draftFromServer(id, queries.queries[id]);
      writeDraftToForm();
    }
  };

  for (const name of ["keywords", "templates", "prototypes"] as const) {
    el<HTMLTextAreaElement>(name).addEventListener("input", readDraftFromForm);
  }
  categorySelect.addEventListener("change", readDraftFromForm);
  el<HTMLButtonElement>("save-query").onclick = saveQuery;
  el<HTMLButtonElement>("run-retrieval").onclick = runRetrieval;
  el<HTMLButtonElement>("compare").onclick = compareSummaries;
  refreshSaveButton();
  setBanner(`connected · seed ${events.meta.seed} · ${events.meta.encoder}`, "info");
}

bootstrap().catch((error) => setBanner(String(error), "error"));
