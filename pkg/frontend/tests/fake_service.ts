import type { FetchLike } from '../src/api.js';
import type { ModelSnapshot, TopicSummary } from '../src/types.js';

export function sixTopicSnapshot(): ModelSnapshot {
  const themes = [
    ['anxiety', 'panic', 'worry'],
    ['mother', 'family', 'childhood'],
    ['sleep', 'insomnia', 'dreams'],
    ['work', 'boss', 'deadline'],
    ['marriage', 'partner', 'argument'],
    ['medication', 'dosage', 'side'],
  ];
  const sizes = [120, 90, 75, 60, 40, 15];
  const topics: TopicSummary[] = themes.map((words, i) => ({
    topic_id: i,
    size: sizes[i],
    label: words[0],
    is_other: false,
    keywords: words.map((w, j) => [w, 1 - 0.1 * j]),
  }));
  return {
    version: 0,
    model_id: 'model-fixture',
    corpus_id: 'corpus-fixture',
    n_docs: 400,
    coherence: {
      metric: 'c_v',
      mean: 0.62,
      per_topic: Object.fromEntries(topics.map((t) => [String(t.topic_id), 0.62])),
    },
    topics,
  };
}

/** In-memory stand-in for the curation service: it enforces optimistic
 * versioning the same way the real one does and replays merges on its own
 * copy of the snapshot. */
export class FakeService {
  snapshot: ModelSnapshot;
  /** coherence mean reported after the next successful curation */
  nextMean: number;
  requests: { url: string; body?: unknown }[] = [];

  constructor(snapshot: ModelSnapshot = sixTopicSnapshot(), nextMean = 0.65) {
    this.snapshot = snapshot;
    this.nextMean = nextMean;
  }

  readonly fetch: FetchLike = async (url, init) => {
    const body = init?.body ? JSON.parse(String(init.body)) : undefined;
    this.requests.push({ url, body });
    if (url.endsWith('/api/model')) {
      return jsonResponse(this.snapshot);
    }
    if (url.endsWith('/api/curation')) {
      return this.handleCuration(body);
    }
    return jsonResponse({ detail: 'not found' }, 404);
  };

  private handleCuration(body: {
    expected_version: number;
    op: { kind: string; payload: { groups?: number[][] } };
  }): Response {
    if (body.expected_version !== this.snapshot.version) {
      return jsonResponse(
        { error: 'version conflict', version: this.snapshot.version },
        409,
      );
    }
    if (body.op.kind !== 'merge' || !body.op.payload.groups) {
      return jsonResponse({ detail: 'unsupported in fixture' }, 422);
    }
    for (const group of body.op.payload.groups) {
      const members = this.snapshot.topics.filter((t) => group.includes(t.topic_id));
      if (members.length !== group.length) {
        return jsonResponse({ detail: 'unknown topic id' }, 422);
      }
      const merged: { topic_id: number; size: number; label: string; is_other: boolean; keywords: [string, number][] } = {
        ...members[0],
        size: members.reduce((acc, t) => acc + t.size, 0),
        label: members.map((t) => t.label).join(' + '),
      };
      this.snapshot = {
        ...this.snapshot,
        topics: [
          merged,
          ...this.snapshot.topics.filter((t) => !group.includes(t.topic_id)),
        ].sort((a, b) => a.topic_id - b.topic_id),
      };
    }
    this.snapshot = {
      ...this.snapshot,
      version: this.snapshot.version + 1,
      coherence: {
        metric: 'c_v',
        mean: this.nextMean,
        per_topic: Object.fromEntries(
          this.snapshot.topics.map((t) => [String(t.topic_id), this.nextMean]),
        ),
      },
    };
    return jsonResponse(this.snapshot);
  }

  /** Simulate another client editing first: the server version moves on. */
  bumpVersionElsewhere(): void {
    this.snapshot = { ...this.snapshot, version: this.snapshot.version + 1 };
  }
}

function jsonResponse(payload: unknown, status = 200): Response {
  return new Response(JSON.stringify(payload), {
    status,
    headers: { 'Content-Type': 'application/json' },
  });
}
