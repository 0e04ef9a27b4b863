export type Keyword = [string, number];

export interface TopicSummary {
  topic_id: number;
  size: number;
  label: string;
  is_other: boolean;
  keywords: Keyword[];
}

export interface CoherenceInfo {
  metric: string;
  mean: number;
  per_topic: Record<string, number>;
}

export interface ModelSnapshot {
  version: number;
  model_id: string;
  corpus_id: string;
  n_docs: number;
  coherence: CoherenceInfo | null;
  topics: TopicSummary[];
}

export interface DistanceMapEntry {
  topic_id: number;
  x: number;
  y: number;
  size: number;
  label: string;
}

export interface HierarchyNode {
  left: number;
  right: number;
  distance: number;
  leaf_topic_ids: number[];
}

export interface Hierarchy {
  leaves: number[];
  nodes: HierarchyNode[];
  version: number;
}

export type MatchTriple = [number, number, number];

export interface MatchesResponse {
  band: [number, number];
  pairs: MatchTriple[];
  matched: MatchTriple[];
  version: number;
}

export type CurationOpKind = 'merge' | 'rename' | 'mark_other';

export interface CurationOp {
  kind: CurationOpKind;
  payload: Record<string, unknown>;
  actor?: string;
}

export type CurationResult =
  | { kind: 'ok'; snapshot: ModelSnapshot }
  | { kind: 'conflict'; currentVersion: number }
  | { kind: 'error'; message: string };
