/** Wire types and the per-cluster view model used by the review grid. */

export type ClusterStatus = "pending" | "confirmed" | "rejected";

export interface FaceTile {
  face_id: string;
  image_id: string;
  quality_score: number;
  /** Present only on potential (unassigned nearby) faces. */
  distance?: number;
}

export interface ClusterSummary {
  cluster_id: string;
  status: ClusterStatus;
  size: number;
  best_quality: number;
}

export interface ClusterListResponse {
  seq: number;
  clusters: ClusterSummary[];
}

export interface ClusterView {
  seq: number;
  cluster_id: string;
  status: ClusterStatus;
  members: FaceTile[];
  potential: FaceTile[];
}

export interface MergeCandidate {
  cluster_id: string;
  distance: number;
  conflict: boolean;
}

export interface SimilarClustersResponse {
  seq: number;
  candidates: MergeCandidate[];
}

export interface FaceContext {
  seq: number;
  face_id: string;
  image_id: string;
  capture_time: number;
  siblings: string[];
  image_ref: string;
}

export interface SimilarFacesResponse {
  seq: number;
  cluster_id: string | null;
  faces: string[];
}

export interface ActionRequest {
  expected_seq: number;
  kind:
    | "confirm_cluster"
    | "reject_cluster"
    | "reject_faces"
    | "split_faces"
    | "merge_clusters";
  cluster_id: string;
  faces?: string[];
  other?: string;
}

export interface ActionResponse {
  seq: number;
  applied: Record<string, unknown>;
  new_cluster_id?: string;
}

export interface SessionOpenResponse {
  session_id: string;
  seq: number;
  n_clusters: number;
}

export interface ExportResponse {
  seq: number;
  clustering: Record<string, unknown>;
  identities: Record<string, string[]>;
}

/** How a tile should be painted. Potential faces stay red even while similar
 *  highlighting is active, because they are not cluster members yet. */
export type FaceFlag = "member" | "potential" | "similar";

/**
 * Client-side presentation state for one cluster view: which tiles are
 * selected and which are currently highlighted as similar to the last
 * selected face. Holds no cluster data of its own — the `view` it wraps is
 * always the latest service response.
 */
export class ClusterViewModel {
  readonly selection = new Set<string>();
  private readonly similar = new Set<string>();

  constructor(public view: ClusterView) {}

  /** Tiles in display order: members first (service order), then potential. */
  tiles(): FaceTile[] {
    return [...this.view.members, ...this.view.potential];
  }

  displayedIds(): Set<string> {
    return new Set(this.tiles().map((t) => t.face_id));
  }

  isPotential(faceId: string): boolean {
    return this.view.potential.some((t) => t.face_id === faceId);
  }

  flagOf(faceId: string): FaceFlag {
    if (this.isPotential(faceId)) return "potential";
    if (this.similar.has(faceId)) return "similar";
    return "member";
  }

  isSelected(faceId: string): boolean {
    return this.selection.has(faceId);
  }

  /** Toggle selection; returns the new selected state. Unknown ids are a
   *  programming error — selection must stay a subset of displayed tiles. */
  toggle(faceId: string): boolean {
    if (!this.displayedIds().has(faceId)) {
      throw new Error(`face ${faceId} is not displayed in this cluster view`);
    }
    if (this.selection.has(faceId)) {
      this.selection.delete(faceId);
      return false;
    }
    this.selection.add(faceId);
    return true;
  }

  /** Replace the similar-face highlight set; ids outside the view are dropped. */
  setSimilar(faceIds: Iterable<string>): void {
    this.similar.clear();
    const displayed = this.displayedIds();
    for (const id of faceIds) {
      if (displayed.has(id)) this.similar.add(id);
    }
  }

  clearSimilar(): void {
    this.similar.clear();
  }

  selectedIds(): string[] {
    return [...this.selection].sort();
  }
}
