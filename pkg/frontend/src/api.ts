/** Thin client for the configuration service's HTTP+JSON API. */

export interface EngineEvent {
  seq: number;
  kind: string;
  revision: number;
  payload: Record<string, unknown>;
}

export interface Selection {
  slot: string;
  solution: string;
}

export interface ConfigurationDoc {
  selections: [string, string][];
  score: number;
}

export interface RelationDoc {
  rows: string[];
  cols: string[];
  entries: number[][];
}

export interface ConsensusDoc {
  labels: string[];
  configurations: Record<string, ConfigurationDoc>;
  groups: string[][];
  solution_assignment: Record<string, string>;
  sweeps: number;
  converged: boolean;
  affinity?: RelationDoc;
}

export interface ResultDoc {
  optimal_configurations: ConfigurationDoc[];
  ratings: Record<string, number>;
  consensus: ConsensusDoc | null;
  provenance: Record<string, unknown>;
}

export interface CellEditUpdate {
  kind: "cell-edit";
  relation: string;
  row: string;
  col: string;
  value: number;
}

export type UpdateDoc =
  | CellEditUpdate
  | { kind: "option-change"; name: string; value: unknown }
  | { kind: "add-solution"; id: string; function: string; evaluation: number }
  | { kind: "remove-agent"; id: string };

export interface UpdateOutcome {
  accepted: boolean;
  revision?: number;
  reasons?: string[];
}

export class ServiceClient {
  constructor(private readonly base: string, private readonly fetchFn: typeof fetch = fetch) {}

  private async json<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.base + path, init);
    const body = await response.json();
    if (!response.ok) {
      throw new Error(`${path}: ${response.status} ${JSON.stringify(body)}`);
    }
    return body as T;
  }

  createSession(document: string): Promise<{ session: string; revision: number }> {
    return this.json("/sessions", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ document }),
    });
  }

  postUpdate(session: string, update: UpdateDoc): Promise<UpdateOutcome> {
    return this.json(`/sessions/${session}/updates`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(update),
    });
  }

  startRun(session: string): Promise<{ running: boolean; revision: number }> {
    return this.json(`/sessions/${session}/runs`, { method: "POST" });
  }

  getResult(
    session: string,
  ): Promise<{ status: "ready" | "empty"; revision: number; result?: ResultDoc }> {
    return this.json(`/sessions/${session}/result`);
  }

  /** Fetch the recorded event stream (NDJSON) from a sequence number on. */
  async fetchEvents(session: string, fromSeq = 0): Promise<EngineEvent[]> {
    const response = await this.fetchFn(
      `${this.base}/sessions/${session}/events?from_seq=${fromSeq}`,
    );
    if (!response.ok) {
      throw new Error(`events: ${response.status}`);
    }
    const text = await response.text();
    return text
      .split("\n")
      .filter((line) => line.trim().length > 0)
      .map((line) => JSON.parse(line) as EngineEvent);
  }
}
