/** Thin typed wrapper over the session HTTP API. */

import type { ProjectionPayload, ScenePayload } from "./wire.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export interface SessionInfo {
  session_id: string;
  n_points: number;
  n_dims: number;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
  ) {
    super(message);
  }
}

export class ApiClient {
  private fetchImpl: FetchLike;

  constructor(
    private baseUrl: string,
    fetchImpl?: FetchLike,
  ) {
    this.fetchImpl = fetchImpl ?? ((url, init) => fetch(url, init));
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const resp = await this.fetchImpl(this.baseUrl + path, {
      method,
      headers: { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!resp.ok) {
      let detail = resp.statusText;
      try {
        const parsed = await resp.json();
        if (parsed && typeof parsed.detail === "string") detail = parsed.detail;
      } catch {
        // keep statusText
      }
      throw new ApiError(resp.status, detail);
    }
    return (await resp.json()) as T;
  }

  createSession(table: string, labelColumn?: string, dims?: number[]): Promise<SessionInfo> {
    return this.request("POST", "/sessions", {
      table,
      label_column: labelColumn,
      dims,
    });
  }

  projection(id: string): Promise<ProjectionPayload> {
    return this.request("GET", `/sessions/${id}/projection`);
  }

  rotate(id: string, matrix: number[][]): Promise<ProjectionPayload> {
    return this.request("POST", `/sessions/${id}/rotation`, { matrix });
  }

  transition(
    id: string,
    slot: "u" | "v" | "w",
    targetDimension: number,
    t: number,
  ): Promise<ProjectionPayload> {
    return this.request("POST", `/sessions/${id}/transition`, {
      slot,
      target_dimension: targetDimension,
      t,
    });
  }

  setParams(id: string, changes: Record<string, unknown>): Promise<{ ok: boolean; stale: boolean }> {
    return this.request("POST", `/sessions/${id}/params`, changes);
  }

  rebuild(id: string): Promise<ScenePayload> {
    return this.request("POST", `/sessions/${id}/rebuild`);
  }

  brush(id: string, clusterId: number, triangles: number[], newClusterId: number): Promise<ScenePayload> {
    return this.request("POST", `/sessions/${id}/brush`, {
      cluster_id: clusterId,
      triangles,
      new_cluster_id: newClusterId,
    });
  }

  restorePrevious(id: string): Promise<ScenePayload> {
    return this.request("POST", `/sessions/${id}/restore-previous`);
  }
}
