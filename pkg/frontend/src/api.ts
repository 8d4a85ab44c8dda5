/** Typed HTTP client for the curation service. All reads and writes go
 *  through here; the UI never derives state any other way. */

import type {
  ActionRequest,
  ActionResponse,
  ClusterListResponse,
  ClusterView,
  ExportResponse,
  FaceContext,
  SessionOpenResponse,
  SimilarClustersResponse,
  SimilarFacesResponse,
} from "./models.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** Error raised for any non-2xx response. `seq` carries the service's
 *  current sequence number when the response included an X-Seq header
 *  (stale-write conflicts do). */
export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string,
    public readonly seq?: number,
  ) {
    super(detail);
    this.name = "ApiError";
  }

  get isStaleSeq(): boolean {
    return this.status === 409 && this.detail.startsWith("stale sequence number");
  }
}

export class CurationApi {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  openSession(datasetPath: string, clusteringPath: string): Promise<SessionOpenResponse> {
    return this.request("POST", "/sessions", {
      dataset: datasetPath,
      clustering: clusteringPath,
    });
  }

  listClusters(sessionId: string): Promise<ClusterListResponse> {
    return this.request("GET", `/sessions/${sessionId}/clusters`);
  }

  getCluster(sessionId: string, clusterId: string): Promise<ClusterView> {
    return this.request("GET", `/clusters/${clusterId}?session=${sessionId}`);
  }

  similarClusters(
    sessionId: string,
    clusterId: string,
    top?: number,
  ): Promise<SimilarClustersResponse> {
    const extra = top === undefined ? "" : `&top=${top}`;
    return this.request("GET", `/clusters/${clusterId}/similar?session=${sessionId}${extra}`);
  }

  faceContext(sessionId: string, faceId: string): Promise<FaceContext> {
    return this.request("GET", `/faces/${faceId}/context?session=${sessionId}`);
  }

  similarFaces(
    sessionId: string,
    faceId: string,
    threshold?: number,
  ): Promise<SimilarFacesResponse> {
    const extra = threshold === undefined ? "" : `&threshold=${threshold}`;
    return this.request("GET", `/faces/${faceId}/similar?session=${sessionId}${extra}`);
  }

  postAction(sessionId: string, action: ActionRequest): Promise<ActionResponse> {
    return this.request("POST", `/sessions/${sessionId}/actions`, action);
  }

  exportSession(sessionId: string): Promise<ExportResponse> {
    return this.request("POST", `/sessions/${sessionId}/export`);
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: { "content-type": "application/json" } };
    if (body !== undefined) init.body = JSON.stringify(body);
    const response = await this.fetchFn(this.baseUrl + path, init);
    if (!response.ok) {
      let detail = `${response.status} ${response.statusText}`;
      try {
        const payload = (await response.json()) as { detail?: unknown };
        if (typeof payload.detail === "string") detail = payload.detail;
      } catch {
        // non-JSON error body; keep the status line
      }
      const seqHeader = response.headers.get("X-Seq");
      const seq = seqHeader === null ? undefined : Number(seqHeader);
      throw new ApiError(response.status, detail, seq);
    }
    return (await response.json()) as T;
  }
}
