/**
 * Typed client for the awareness service.
 *
 * Every request goes to a documented /api/v1 route with a bearer token;
 * there is no endpoint here (or on the server) that returns raw sensor
 * data. The fetch function is injectable so tests can audit the exact
 * URLs the console touches.
 */

export interface Annotation {
  id: string;
  teacher: string;
  text: string;
  t: number;
}

export interface Deviation {
  level: "below" | "typical" | "above" | "no_baseline";
  ratio: number | "unbounded" | null;
}

export interface Cue {
  cue_key: string;
  child: string;
  date: string;
  window_id: string;
  kind: "physical" | "verbal" | "social";
  class_id: string | null;
  window_start: number;
  window_end: number;
  value: number | null;
  coverage: number;
  low_confidence: boolean;
  baseline: { mean: number; n: number; as_of: string } | null;
  deviation: Deviation;
  location: string;
  annotations: Annotation[];
  distinct_peers?: number;
  copresence_minutes?: number;
}

export interface Message {
  id: string;
  child: string;
  sender_role: "teacher" | "parent";
  text: string;
  t: number;
  seq: number;
  read: boolean;
}

export interface SelfReport {
  t: number;
  emotion_id: string;
  label: string;
  seq: number;
}

export interface Meta {
  school_name: string;
  timezone: string;
  emotions: { id: string; label: string }[];
  children: { child_id: string; classes: string[] }[];
}

export interface ResponseLike {
  status: number;
  ok: boolean;
  json(): Promise<unknown>;
}

export type FetchLike = (url: string, init?: {
  method?: string;
  headers?: Record<string, string>;
  body?: string;
}) => Promise<ResponseLike>;

export class ApiError extends Error {
  constructor(
    public status: number,
    public errorName: string,
    public detail: string,
  ) {
    super(`${errorName}: ${detail}`);
  }
}

export class ApiClient {
  constructor(
    private baseUrl: string,
    private token: string,
    private fetchLike: FetchLike,
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchLike(`${this.baseUrl}${path}`, {
      method,
      headers: {
        Authorization: `Bearer ${this.token}`,
        "Content-Type": "application/json",
      },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const doc = (await response.json()) as Record<string, unknown>;
    if (!response.ok) {
      throw new ApiError(
        response.status,
        String(doc["error"] ?? "UnknownError"),
        String(doc["detail"] ?? ""),
      );
    }
    return doc as T;
  }

  private async requestList<T>(path: string): Promise<T[]> {
    const response = await this.fetchLike(`${this.baseUrl}${path}`, {
      headers: { Authorization: `Bearer ${this.token}` },
    });
    const doc = await response.json();
    if (!response.ok) {
      const err = doc as Record<string, unknown>;
      throw new ApiError(response.status, String(err["error"] ?? "UnknownError"),
        String(err["detail"] ?? ""));
    }
    return doc as T[];
  }

  getMeta(): Promise<Meta> {
    return this.request<Meta>("GET", "/api/v1/meta");
  }

  getCues(child: string, date: string): Promise<Cue[]> {
    return this.requestList<Cue>(
      `/api/v1/children/${encodeURIComponent(child)}/cues?date=${date}`);
  }

  getSelfReports(child: string, date: string): Promise<SelfReport[]> {
    return this.requestList<SelfReport>(
      `/api/v1/children/${encodeURIComponent(child)}/selfreports?date=${date}`);
  }

  getLocation(child: string, at: number): Promise<{ label: string }> {
    return this.request<{ label: string }>(
      "GET", `/api/v1/children/${encodeURIComponent(child)}/location?at=${at}`);
  }

  getMessages(child: string, since?: number): Promise<Message[]> {
    const cursor = since === undefined ? "" : `&since=${since}`;
    return this.requestList<Message>(
      `/api/v1/messages?child=${encodeURIComponent(child)}${cursor}`);
  }

  postMessage(child: string, text: string): Promise<{ id: string }> {
    return this.request<{ id: string }>("POST", "/api/v1/messages", { child, text });
  }

  postAnnotation(cueKey: string, teacher: string, text: string): Promise<{ id: string }> {
    return this.request<{ id: string }>(
      "POST", `/api/v1/cues/${encodeURIComponent(cueKey)}/annotations`,
      { teacher, text });
  }

  getGraph(date: string): Promise<{ date: string; nodes: string[]; edges: unknown[] }> {
    return this.request("GET", `/api/v1/graph?date=${date}`);
  }
}
