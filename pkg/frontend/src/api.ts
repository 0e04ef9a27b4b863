import type {
  CurationOp,
  CurationResult,
  DistanceMapEntry,
  Hierarchy,
  MatchesResponse,
  ModelSnapshot,
} from './types.js';

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** Thin typed client over the curation service HTTP API. */
export class CurationApi {
  private readonly base: string;
  private readonly fetchFn: FetchLike;

  constructor(base = '', fetchFn: FetchLike = (...args) => fetch(...args)) {
    this.base = base.replace(/\/$/, '');
    this.fetchFn = fetchFn;
  }

  private async getJson<T>(path: string): Promise<T> {
    const resp = await this.fetchFn(`${this.base}${path}`);
    if (!resp.ok) {
      throw new Error(`GET ${path} failed with ${resp.status}`);
    }
    return (await resp.json()) as T;
  }

  getModel(): Promise<ModelSnapshot> {
    return this.getJson('/api/model');
  }

  getDistanceMap(): Promise<{ entries: DistanceMapEntry[]; version: number }> {
    return this.getJson('/api/distance-map');
  }

  getHierarchy(): Promise<Hierarchy> {
    return this.getJson('/api/hierarchy');
  }

  getTopicDocuments(topicId: number, limit = 4): Promise<{ documents: string[] }> {
    return this.getJson(`/api/topics/${topicId}/documents?limit=${limit}`);
  }

  getMatches(lo: number, hi: number, other?: string): Promise<MatchesResponse> {
    const params = new URLSearchParams({ lo: String(lo), hi: String(hi) });
    if (other) params.set('other', other);
    return this.getJson(`/api/matches?${params.toString()}`);
  }

  private async post(path: string, body: unknown): Promise<CurationResult> {
    let resp: Response;
    try {
      resp = await this.fetchFn(`${this.base}${path}`, {
        method: 'POST',
        headers: { 'Content-Type': 'application/json' },
        body: JSON.stringify(body),
      });
    } catch (err) {
      return { kind: 'error', message: String(err) };
    }
    if (resp.status === 409) {
      const data = (await resp.json()) as { version: number };
      return { kind: 'conflict', currentVersion: data.version };
    }
    if (!resp.ok) {
      const data = (await resp.json().catch(() => ({}))) as { detail?: string };
      return { kind: 'error', message: data.detail ?? `HTTP ${resp.status}` };
    }
    return { kind: 'ok', snapshot: (await resp.json()) as ModelSnapshot };
  }

  submitOp(expectedVersion: number, op: CurationOp): Promise<CurationResult> {
    return this.post('/api/curation', { expected_version: expectedVersion, op });
  }

  submitUndo(expectedVersion: number): Promise<CurationResult> {
    return this.post('/api/undo', { expected_version: expectedVersion });
  }
}
