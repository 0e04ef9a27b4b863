import { CurationApi } from './api.js';
import {
  applySnapshot,
  dismissConflict,
  fillBasketFromSubtree,
  initialState,
  setBand,
  setView,
  submitMarkOther,
  submitMerge,
  submitUndo,
  toggleBasket,
  type ViewName,
  type ViewState,
} from './state.js';
import {
  conflictDialogHtml,
  dendrogramSvg,
  distanceMapSvg,
  matchesTableHtml,
  toolbarHtml,
  topicDetailHtml,
  topicListHtml,
} from './render.js';
import type { DistanceMapEntry, Hierarchy, MatchesResponse } from './types.js';

const api = new CurationApi();

let state: ViewState = initialState();
let distanceEntries: DistanceMapEntry[] = [];
let hierarchy: Hierarchy | null = null;
let matches: MatchesResponse | null = null;
let detailTopicId: number | null = null;
let detailDocs: string[] = [];

const root = document.getElementById('app')!;

function render(): void {
  const snapshot = state.snapshot;
  let view = '';
  if (snapshot !== null) {
    switch (state.view) {
      case 'map':
        view = distanceMapSvg(distanceEntries, snapshot, state.basket);
        break;
      case 'dendrogram':
        view = hierarchy ? dendrogramSvg(hierarchy) : '<p>not enough topics</p>';
        break;
      case 'topic-detail': {
        const topic = snapshot.topics.find((t) => t.topic_id === detailTopicId);
        view = topic ? topicDetailHtml(topic, detailDocs) : '<p>pick a topic</p>';
        break;
      }
      case 'matches':
        view = matches ? matchesTableHtml(matches) : '<p>no comparison model configured</p>';
        break;
    }
  }
  const tabs = (['map', 'dendrogram', 'topic-detail', 'matches'] as ViewName[])
    .map(
      (name) =>
        `<button class="tab${name === state.view ? ' active' : ''}" data-view="${name}">${name}</button>`,
    )
    .join('');
  root.innerHTML =
    `<nav class="tabs">${tabs}</nav>` +
    toolbarHtml(state) +
    `<main class="view">${view}</main>` +
    (snapshot ? `<aside class="sidebar">${topicListHtml(snapshot, state.basket)}</aside>` : '') +
    conflictDialogHtml(state);
}

function update(next: ViewState): void {
  state = next;
  render();
}

async function refreshAll(): Promise<void> {
  const snapshot = await api.getModel();
  update(applySnapshot(state, snapshot));
  try {
    const map = await api.getDistanceMap();
    distanceEntries = map.entries;
  } catch {
    distanceEntries = [];
  }
  try {
    hierarchy = await api.getHierarchy();
  } catch {
    hierarchy = null;
  }
  try {
    matches = await api.getMatches(state.band[0], state.band[1]);
  } catch {
    matches = null;
  }
  render();
}

async function openDetail(topicId: number): Promise<void> {
  detailTopicId = topicId;
  try {
    detailDocs = (await api.getTopicDocuments(topicId)).documents;
  } catch {
    detailDocs = [];
  }
  update(setView(state, 'topic-detail'));
}

root.addEventListener('click', (event) => {
  const target = event.target as HTMLElement;
  const tab = target.closest<HTMLElement>('.tab');
  if (tab) {
    update(setView(state, tab.dataset.view as ViewName));
    return;
  }
  const circle = target.closest<SVGElement & HTMLElement>('.topic-circle');
  if (circle) {
    const id = Number(circle.dataset.topicId);
    if (event.detail === 2) void openDetail(id);
    else update(toggleBasket(state, id));
    return;
  }
  const row = target.closest<HTMLElement>('.topic-row');
  if (row) {
    const id = Number(row.dataset.topicId);
    if (target instanceof HTMLInputElement) update(toggleBasket(state, id));
    else void openDetail(id);
    return;
  }
  const join = target.closest<HTMLElement>('.join');
  if (join) {
    const ids = (join.dataset.leaves ?? '').split(',').filter(Boolean).map(Number);
    update(fillBasketFromSubtree(state, ids));
    return;
  }
  if (target.closest('.merge')) {
    void submitMerge(state, api).then(update).then(refreshViews);
    return;
  }
  if (target.closest('.mark-other')) {
    void submitMarkOther(state, api).then(update).then(refreshViews);
    return;
  }
  if (target.closest('.undo')) {
    void submitUndo(state, api).then(update).then(refreshViews);
    return;
  }
  if (target.closest('.reload')) {
    update(dismissConflict(state));
    void refreshAll();
    return;
  }
  if (target.closest('.dismiss')) {
    update(dismissConflict(state));
  }
});

root.addEventListener('change', (event) => {
  const target = event.target as HTMLElement;
  if (target instanceof HTMLInputElement && (target.classList.contains('band-lo') || target.classList.contains('band-hi'))) {
    const lo = Number(root.querySelector<HTMLInputElement>('.band-lo')?.value ?? state.band[0]);
    const hi = Number(root.querySelector<HTMLInputElement>('.band-hi')?.value ?? state.band[1]);
    update(setBand(state, Math.min(lo, hi), Math.max(lo, hi)));
    void api
      .getMatches(state.band[0], state.band[1])
      .then((m) => {
        matches = m;
        render();
      })
      .catch(() => undefined);
  }
});

/** After a successful curation the derived views are stale; re-fetch them. */
async function refreshViews(): Promise<void> {
  if (state.conflict || state.error) return;
  try {
    distanceEntries = (await api.getDistanceMap()).entries;
  } catch {
    distanceEntries = [];
  }
  try {
    hierarchy = await api.getHierarchy();
  } catch {
    hierarchy = null;
  }
  render();
}

void refreshAll();
