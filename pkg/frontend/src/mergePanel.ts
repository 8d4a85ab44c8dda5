/** Renders merge candidates for the open cluster, in the service's order
 *  (nearest centroid first). Candidates the service flagged as conflicting
 *  (shared source image) get the warning style and a confirmation dialog
 *  before the merge is attempted — the service will refuse it, and the
 *  refusal is then shown as-is. */

export interface MergeCandidateView {
  cluster_id: string;
  distance: number;
  conflict: boolean;
}

export function renderMergePanel(
  container: HTMLElement,
  candidates: MergeCandidateView[],
  onPick: (candidate: MergeCandidateView) => void,
): void {
  container.replaceChildren();

  const title = document.createElement("div");
  title.className = "merge-title";
  title.textContent = "Merge candidates";
  container.appendChild(title);

  if (candidates.length === 0) {
    const empty = document.createElement("div");
    empty.className = "merge-empty";
    empty.textContent = "no other clusters to merge with";
    container.appendChild(empty);
    return;
  }

  const list = document.createElement("ul");
  list.className = "merge-list";
  for (const candidate of candidates) {
    const item = document.createElement("li");
    item.className = candidate.conflict ? "merge-candidate conflict" : "merge-candidate";
    item.dataset.clusterId = candidate.cluster_id;
    item.textContent = candidate.conflict
      ? `${candidate.cluster_id} (d=${candidate.distance.toFixed(1)}, shares an image)`
      : `${candidate.cluster_id} (d=${candidate.distance.toFixed(1)})`;
    item.addEventListener("click", () => onPick(candidate));
    list.appendChild(item);
  }
  container.appendChild(list);
}
