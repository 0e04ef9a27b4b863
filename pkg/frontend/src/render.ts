import type {
  DistanceMapEntry,
  MatchesResponse,
  ModelSnapshot,
  TopicSummary,
} from './types.js';
import type { ViewState } from './state.js';

const MAP_WIDTH = 640;
const MAP_HEIGHT = 440;
const MAP_PADDING = 40;
const MAX_RADIUS = 42;
const TOP_KEYWORDS = 10;

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

export function keywordHover(topic: TopicSummary): string {
  return topic.keywords
    .slice(0, TOP_KEYWORDS)
    .map(([word]) => word)
    .join(', ');
}

/** Intertopic distance map: one circle per topic, area proportional to its
 * document count, hover title carrying the top keywords. */
export function distanceMapSvg(
  entries: DistanceMapEntry[],
  snapshot: ModelSnapshot | null,
  basket: number[] = [],
): string {
  if (entries.length === 0) {
    return `<svg class="map" viewBox="0 0 ${MAP_WIDTH} ${MAP_HEIGHT}"></svg>`;
  }
  const xs = entries.map((e) => e.x);
  const ys = entries.map((e) => e.y);
  const spanX = Math.max(Math.max(...xs) - Math.min(...xs), 1e-9);
  const spanY = Math.max(Math.max(...ys) - Math.min(...ys), 1e-9);
  const maxSize = Math.max(...entries.map((e) => e.size));
  const byId = new Map((snapshot?.topics ?? []).map((t) => [t.topic_id, t]));
  const circles = entries
    .map((e) => {
      const cx = MAP_PADDING + ((e.x - Math.min(...xs)) / spanX) * (MAP_WIDTH - 2 * MAP_PADDING);
      const cy = MAP_PADDING + ((e.y - Math.min(...ys)) / spanY) * (MAP_HEIGHT - 2 * MAP_PADDING);
      // area ∝ size  =>  radius ∝ sqrt(size)
      const r = MAX_RADIUS * Math.sqrt(e.size / maxSize);
      const topic = byId.get(e.topic_id);
      const hover = topic ? `${escapeHtml(e.label)}: ${escapeHtml(keywordHover(topic))}` : escapeHtml(e.label);
      const selected = basket.includes(e.topic_id) ? ' selected' : '';
      return (
        `<circle class="topic-circle${selected}" data-topic-id="${e.topic_id}" ` +
        `cx="${cx.toFixed(2)}" cy="${cy.toFixed(2)}" r="${r.toFixed(3)}">` +
        `<title>${hover}</title></circle>`
      );
    })
    .join('');
  return `<svg class="map" viewBox="0 0 ${MAP_WIDTH} ${MAP_HEIGHT}">${circles}</svg>`;
}

/** Topic list sorted by size descending; Others stays at the bottom. */
export function topicListHtml(snapshot: ModelSnapshot, basket: number[] = []): string {
  const topics = [...snapshot.topics].sort((a, b) => {
    if (a.is_other !== b.is_other) return a.is_other ? 1 : -1;
    return b.size - a.size;
  });
  const rows = topics
    .map((t) => {
      const checked = basket.includes(t.topic_id) ? ' checked' : '';
      const box = t.is_other
        ? ''
        : `<input type="checkbox" data-topic-id="${t.topic_id}"${checked}>`;
      return (
        `<li class="topic-row" data-topic-id="${t.topic_id}">${box}` +
        `<span class="label">${escapeHtml(t.label)}</span>` +
        `<span class="size">${t.size}</span></li>`
      );
    })
    .join('');
  return `<ul class="topic-list">${rows}</ul>`;
}

export function topicDetailHtml(topic: TopicSummary, documents: string[]): string {
  const keywords = topic.keywords
    .slice(0, TOP_KEYWORDS)
    .map(([word, weight]) => `<li>${escapeHtml(word)} <em>${weight.toFixed(3)}</em></li>`)
    .join('');
  const remarks = documents
    .slice(0, 4)
    .map((d) => `<blockquote>${escapeHtml(d)}</blockquote>`)
    .join('');
  return (
    `<section class="topic-detail"><h2>${escapeHtml(topic.label)}</h2>` +
    `<ul class="keywords">${keywords}</ul>${remarks}</section>`
  );
}

export interface DendrogramInput {
  leaves: number[];
  nodes: { left: number; right: number; distance: number; leaf_topic_ids: number[] }[];
}

/** Horizontal dendrogram. Each join is a clickable group whose
 * data-leaves attribute names the topics it would pour into the basket. */
export function dendrogramSvg(hierarchy: DendrogramInput, width = 640, rowHeight = 28): string {
  const k = hierarchy.leaves.length;
  const height = (k + 1) * rowHeight;
  const maxDist = Math.max(...hierarchy.nodes.map((n) => n.distance), 1e-9);
  const xOf = (dist: number) => 80 + (dist / maxDist) * (width - 120);
  const pos = new Map<number, { x: number; y: number }>();
  hierarchy.leaves.forEach((topicId, i) => {
    pos.set(i, { x: 80, y: (i + 1) * rowHeight });
  });
  const labels = hierarchy.leaves
    .map((topicId, i) => {
      const { y } = pos.get(i)!;
      return `<text class="leaf" x="4" y="${y + 4}" data-topic-id="${topicId}">${topicId}</text>`;
    })
    .join('');
  const joins = hierarchy.nodes
    .map((node, idx) => {
      const a = pos.get(node.left)!;
      const b = pos.get(node.right)!;
      const x = xOf(node.distance);
      const y = (a.y + b.y) / 2;
      pos.set(k + idx, { x, y });
      const leaves = node.leaf_topic_ids.join(',');
      return (
        `<g class="join" data-leaves="${leaves}">` +
        `<path d="M ${a.x} ${a.y} H ${x} V ${b.y} H ${b.x}" fill="none"/></g>`
      );
    })
    .join('');
  return `<svg class="dendrogram" viewBox="0 0 ${width} ${height}">${labels}${joins}</svg>`;
}

export function matchesTableHtml(matches: MatchesResponse): string {
  const [lo, hi] = matches.band;
  const rows = matches.matched
    .map(
      ([a, b, c]) =>
        `<tr><td>${a}</td><td>${b}</td><td>${c.toFixed(3)}</td></tr>`,
    )
    .join('');
  const body = rows || '<tr><td colspan="3" class="empty">no matches in band</td></tr>';
  return (
    `<div class="matches">` +
    `<label>band <input type="range" class="band-lo" min="0" max="1" step="0.01" value="${lo}">` +
    `<input type="range" class="band-hi" min="0" max="1" step="0.01" value="${hi}">` +
    `<span class="band-text">${lo.toFixed(2)}–${hi.toFixed(2)}</span></label>` +
    `<table><thead><tr><th>this model</th><th>other</th><th>cosine</th></tr></thead>` +
    `<tbody>${body}</tbody></table></div>`
  );
}

/** Signed coherence delta, e.g. "+0.0123" / "-0.0040". */
export function coherenceDeltaText(delta: number | null): string {
  if (delta === null) return '';
  const sign = delta >= 0 ? '+' : '-';
  return `${sign}${Math.abs(delta).toFixed(4)}`;
}

export function coherenceBadgeHtml(state: ViewState): string {
  const mean = state.lastCoherenceMean;
  if (mean === null) return '<span class="coherence"></span>';
  const delta = coherenceDeltaText(state.coherenceDelta);
  const deltaSpan = delta ? ` <span class="delta">${delta}</span>` : '';
  return `<span class="coherence">coherence ${mean.toFixed(4)}${deltaSpan}</span>`;
}

export function conflictDialogHtml(state: ViewState): string {
  if (!state.conflict) return '';
  return (
    `<div class="conflict-dialog" role="alertdialog">` +
    `<p>The model changed on the server (now version ${state.conflict.currentVersion}, ` +
    `you were editing version ${state.version}).</p>` +
    `<button class="reload">Reload latest</button>` +
    `<button class="dismiss">Dismiss</button></div>`
  );
}

export function toolbarHtml(state: ViewState): string {
  const mergeDisabled = state.pending || state.basket.length < 2 ? ' disabled' : '';
  const undoDisabled = state.pending || state.version < 1 ? ' disabled' : '';
  const otherDisabled = state.pending || state.basket.length === 0 ? ' disabled' : '';
  return (
    `<div class="toolbar">` +
    `<button class="merge"${mergeDisabled}>Merge (${state.basket.length})</button>` +
    `<button class="mark-other"${otherDisabled}>Mark other</button>` +
    `<button class="undo"${undoDisabled}>Undo</button>` +
    coherenceBadgeHtml(state) +
    `</div>`
  );
}
