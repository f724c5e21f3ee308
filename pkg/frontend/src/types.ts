/** Wire formats of the crisis-scope HTTP JSON API. */

export interface Meta {
  seed: number;
  encoder: string;
  generator: string;
}

export interface EventInfo {
  event_id: string;
  name: string;
  messages: number;
  informative: number;
  languages: string[];
}

export interface EventsResponse {
  events: EventInfo[];
  meta: Meta;
}

export interface SimilarityFeatureMap {
  kw_avg: number;
  kw_max: number;
  tpl_avg: number;
  tpl_max: number;
  proto_avg: number;
  proto_max: number;
}

export const FEATURE_ORDER: (keyof SimilarityFeatureMap)[] = [
  "kw_avg",
  "kw_max",
  "tpl_avg",
  "tpl_max",
  "proto_avg",
  "proto_max",
];

export interface RankedCandidate {
  message_id: string;
  text: string;
  lang: string;
  score: number;
  position: number;
  features: SimilarityFeatureMap;
}

export interface RankResponse {
  candidates: RankedCandidate[];
  meta: Meta;
}

export interface SummarySegment {
  text: string;
  cluster_size: number;
  source_ids: string[];
}

export interface SummaryPayload {
  mode: "regular" | "diversified";
  full_text: string;
  segments: SummarySegment[];
  truncated: boolean;
}

export interface SummarizeResponse {
  summary: SummaryPayload;
  meta: Meta;
}

export interface QueryPayload {
  id?: string;
  category: string;
  keywords: string[];
  templates: string[];
  prototypes: string[];
}

export interface QueriesResponse {
  queries: Record<string, Omit<QueryPayload, "id">>;
  meta: Meta;
}

export const CATEGORIES = [
  "Casualties",
  "Damage",
  "Danger",
  "Government",
  "Sensor",
  "Service",
  "Water",
  "Weather",
] as const;
