/** Maps review-grid buttons onto curation-service actions and handles the
 *  optimistic-concurrency protocol: every write carries the last sequence
 *  number the UI has seen, and a stale-write conflict offers one
 *  reload-and-retry round. The UI itself never mutates cluster state — after
 *  a successful write it re-reads everything from the service. */

import { ApiError, CurationApi } from "./api.js";
import type { ActionRequest, ActionResponse, ExportResponse } from "./models.js";

export interface SessionStore {
  /** Last sequence number observed from the service. */
  readonly seq: number;
  /** Re-fetch authoritative state (cluster list, current cluster view). */
  refresh(): Promise<void>;
}

export type ConfirmPrompt = (message: string) => boolean | Promise<boolean>;
export type Notify = (message: string) => void;

export class ActionDispatcher {
  constructor(
    private readonly api: CurationApi,
    private readonly sessionId: string,
    private readonly store: SessionStore,
    private readonly promptReload: ConfirmPrompt,
    private readonly showError: Notify,
  ) {}

  /** Confirm always covers the whole cluster; an empty selection means the
   *  reviewer accepted every face as shown. */
  confirmCluster(clusterId: string): Promise<ActionResponse | null> {
    return this.dispatch({ kind: "confirm_cluster", cluster_id: clusterId });
  }

  rejectCluster(clusterId: string): Promise<ActionResponse | null> {
    return this.dispatch({ kind: "reject_cluster", cluster_id: clusterId });
  }

  rejectSelected(clusterId: string, faces: string[]): Promise<ActionResponse | null> {
    if (faces.length === 0) {
      this.showError("select at least one face to reject");
      return Promise.resolve(null);
    }
    return this.dispatch({ kind: "reject_faces", cluster_id: clusterId, faces });
  }

  splitSelected(clusterId: string, faces: string[]): Promise<ActionResponse | null> {
    if (faces.length === 0) {
      this.showError("select at least one face to split out");
      return Promise.resolve(null);
    }
    return this.dispatch({ kind: "split_faces", cluster_id: clusterId, faces });
  }

  mergeClusters(targetId: string, otherId: string): Promise<ActionResponse | null> {
    return this.dispatch({ kind: "merge_clusters", cluster_id: targetId, other: otherId });
  }

  async exportSession(): Promise<ExportResponse | null> {
    try {
      return await this.api.exportSession(this.sessionId);
    } catch (err) {
      this.showError(describe(err));
      return null;
    }
  }

  private async dispatch(
    action: Omit<ActionRequest, "expected_seq">,
  ): Promise<ActionResponse | null> {
    const maxAttempts = 2; // one retry after a reload-and-retry prompt
    for (let attempt = 0; attempt < maxAttempts; attempt++) {
      try {
        const result = await this.api.postAction(this.sessionId, {
          ...action,
          expected_seq: this.store.seq,
        });
        await this.store.refresh();
        return result;
      } catch (err) {
        if (err instanceof ApiError && err.isStaleSeq && attempt === 0) {
          const retry = await this.promptReload(
            `this session changed elsewhere (${err.detail}); reload and retry?`,
          );
          if (!retry) return null;
          await this.store.refresh();
          continue;
        }
        if (err instanceof ApiError) {
          // The service's refusal is shown verbatim; a vanished target means
          // our view is out of date, so reload it.
          this.showError(err.detail);
          if (err.status === 409) await this.store.refresh();
          return null;
        }
        this.showError(describe(err));
        return null;
      }
    }
    return null;
  }
}

function describe(err: unknown): string {
  if (err instanceof ApiError) return err.detail;
  const message = err instanceof Error ? err.message : String(err);
  return `service unreachable: ${message}`;
}
