import type { CurationApi } from './api.js';
import type { CurationResult, ModelSnapshot } from './types.js';

export type ViewName = 'map' | 'dendrogram' | 'topic-detail' | 'matches';

export interface ViewState {
  snapshot: ModelSnapshot | null;
  version: number;
  basket: number[];
  view: ViewName;
  lastCoherenceMean: number | null;
  coherenceDelta: number | null;
  pending: boolean;
  conflict: { currentVersion: number } | null;
  error: string | null;
  band: [number, number];
}

export function initialState(): ViewState {
  return {
    snapshot: null,
    version: -1,
    basket: [],
    view: 'map',
    lastCoherenceMean: null,
    coherenceDelta: null,
    pending: false,
    conflict: null,
    error: null,
    band: [0.9, 1.0],
  };
}

export function topicIds(snapshot: ModelSnapshot | null): number[] {
  return snapshot ? snapshot.topics.filter((t) => !t.is_other).map((t) => t.topic_id) : [];
}

/** Adopt a fresh service snapshot; the basket is cleared and the signed
 * coherence delta relative to the previous snapshot is recorded. */
export function applySnapshot(state: ViewState, snapshot: ModelSnapshot): ViewState {
  const mean = snapshot.coherence?.mean ?? null;
  const delta =
    state.lastCoherenceMean !== null && mean !== null
      ? mean - state.lastCoherenceMean
      : null;
  return {
    ...state,
    snapshot,
    version: snapshot.version,
    basket: [],
    lastCoherenceMean: mean,
    coherenceDelta: delta,
    conflict: null,
    error: null,
  };
}

export function toggleBasket(state: ViewState, topicId: number): ViewState {
  if (!topicIds(state.snapshot).includes(topicId)) {
    return state; // never build ops from ids absent in the snapshot
  }
  const basket = state.basket.includes(topicId)
    ? state.basket.filter((id) => id !== topicId)
    : [...state.basket, topicId];
  return { ...state, basket };
}

/** A dendrogram subtree click: its leaf topics become the basket. */
export function fillBasketFromSubtree(state: ViewState, leafIds: number[]): ViewState {
  const known = new Set(topicIds(state.snapshot));
  return { ...state, basket: leafIds.filter((id) => known.has(id)) };
}

export function setView(state: ViewState, view: ViewName): ViewState {
  return { ...state, view };
}

export function setBand(state: ViewState, lo: number, hi: number): ViewState {
  return { ...state, band: [lo, hi] };
}

export function dismissConflict(state: ViewState): ViewState {
  return { ...state, conflict: null };
}

function settle(state: ViewState, result: CurationResult): ViewState {
  const done = { ...state, pending: false };
  switch (result.kind) {
    case 'ok':
      return applySnapshot(done, result.snapshot);
    case 'conflict':
      // no local mutation: snapshot, version and basket stay as they were
      return { ...done, conflict: { currentVersion: result.currentVersion } };
    case 'error':
      return { ...done, error: result.message };
  }
}

/** Submit the basket as a single merge; at most one request in flight. */
export async function submitMerge(state: ViewState, api: CurationApi): Promise<ViewState> {
  if (state.pending || state.basket.length < 2 || state.snapshot === null) {
    return state;
  }
  const inFlight = { ...state, pending: true };
  const result = await api.submitOp(state.version, {
    kind: 'merge',
    payload: { groups: [[...state.basket].sort((a, b) => a - b)] },
  });
  return settle(inFlight, result);
}

export async function submitRename(
  state: ViewState,
  api: CurationApi,
  topicId: number,
  label: string,
): Promise<ViewState> {
  if (state.pending || !topicIds(state.snapshot).includes(topicId)) {
    return state;
  }
  const result = await api.submitOp(state.version, {
    kind: 'rename',
    payload: { topic_id: topicId, label },
  });
  return settle({ ...state, pending: true }, result);
}

export async function submitMarkOther(state: ViewState, api: CurationApi): Promise<ViewState> {
  if (state.pending || state.basket.length === 0) {
    return state;
  }
  const result = await api.submitOp(state.version, {
    kind: 'mark_other',
    payload: { topic_ids: [...state.basket].sort((a, b) => a - b) },
  });
  return settle({ ...state, pending: true }, result);
}

export async function submitUndo(state: ViewState, api: CurationApi): Promise<ViewState> {
  if (state.pending || state.version < 1) {
    return state;
  }
  const result = await api.submitUndo(state.version);
  return settle({ ...state, pending: true }, result);
}
