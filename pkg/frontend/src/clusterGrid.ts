/** Renders the face-tile grid for one cluster. Pure view: everything shown
 *  comes from the view model, which in turn wraps the latest service
 *  response. Left click toggles selection; right click asks for image
 *  context. */

import type { ClusterViewModel } from "./models.js";

export interface GridCallbacks {
  onToggle(faceId: string): void;
  onContext(faceId: string): void;
}

export function renderClusterGrid(
  container: HTMLElement,
  vm: ClusterViewModel,
  callbacks: GridCallbacks,
): void {
  container.replaceChildren();

  const header = document.createElement("div");
  header.className = "cluster-header";
  header.textContent = `${vm.view.cluster_id} — ${vm.view.status} — ${vm.view.members.length} faces`;
  container.appendChild(header);

  const grid = document.createElement("div");
  grid.className = "cluster-grid";
  for (const tile of vm.tiles()) {
    const el = document.createElement("div");
    el.className = `face-tile ${vm.flagOf(tile.face_id)}`;
    if (vm.isSelected(tile.face_id)) el.classList.add("selected");
    el.dataset.faceId = tile.face_id;

    const label = document.createElement("span");
    label.className = "face-label";
    label.textContent = tile.face_id;
    el.appendChild(label);

    const quality = document.createElement("span");
    quality.className = "face-quality";
    quality.textContent =
      tile.distance === undefined
        ? `q=${tile.quality_score.toFixed(2)}`
        : `q=${tile.quality_score.toFixed(2)} d=${tile.distance.toFixed(1)}`;
    el.appendChild(quality);

    el.addEventListener("click", () => callbacks.onToggle(tile.face_id));
    el.addEventListener("contextmenu", (event) => {
      event.preventDefault();
      callbacks.onContext(tile.face_id);
    });
    grid.appendChild(el);
  }
  container.appendChild(grid);
}
