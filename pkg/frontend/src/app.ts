/** Application shell: owns the authoritative session state (cluster list,
 *  open cluster view, merge candidates, sequence number), renders it, and
 *  routes user gestures through the action dispatcher. All state shown comes
 *  from service responses; a failed call leaves the last good state on
 *  screen behind a dismissible error banner. */

import { CurationApi } from "./api.js";
import { ActionDispatcher, type ConfirmPrompt, type SessionStore } from "./actions.js";
import { renderClusterGrid } from "./clusterGrid.js";
import { renderMergePanel } from "./mergePanel.js";
import { clearContextPanel, renderContextPanel } from "./contextPanel.js";
import {
  ClusterViewModel,
  type ClusterSummary,
  type MergeCandidate,
} from "./models.js";

export interface AppPrompts {
  confirmDialog: ConfirmPrompt;
}

export class App implements SessionStore {
  seq = 0;

  private clusters: ClusterSummary[] = [];
  private vm: ClusterViewModel | null = null;
  private candidates: MergeCandidate[] = [];
  private currentClusterId: string | null = null;
  private readonly dispatcher: ActionDispatcher;

  private readonly sidebarEl: HTMLElement;
  private readonly statusEl: HTMLElement;
  private readonly bannerEl: HTMLElement;
  private readonly gridEl: HTMLElement;
  private readonly buttonsEl: HTMLElement;
  private readonly mergeEl: HTMLElement;
  private readonly contextEl: HTMLElement;

  constructor(
    root: HTMLElement,
    private readonly api: CurationApi,
    private readonly sessionId: string,
    private readonly prompts: AppPrompts = {
      confirmDialog: (message) => window.confirm(message),
    },
  ) {
    root.replaceChildren();
    this.statusEl = child(root, "div", "status-line");
    this.bannerEl = child(root, "div", "error-banner");
    this.bannerEl.addEventListener("click", () => this.clearBanner());
    const layout = child(root, "div", "layout");
    this.sidebarEl = child(layout, "div", "sidebar");
    const main = child(layout, "div", "main");
    this.gridEl = child(main, "div", "grid-panel");
    this.buttonsEl = child(main, "div", "action-buttons");
    this.mergeEl = child(main, "div", "merge-panel");
    this.contextEl = child(main, "div", "context-panel");
    this.buildButtons();

    this.dispatcher = new ActionDispatcher(
      api,
      sessionId,
      this,
      prompts.confirmDialog,
      (message) => this.showBanner(message),
    );
  }

  async start(): Promise<void> {
    await this.refresh();
  }

  /** Re-read everything we display from the service. Selection survives a
   *  refresh only for faces still shown; similar-face highlighting is
   *  dropped until the reviewer selects again. */
  async refresh(): Promise<void> {
    try {
      const list = await this.api.listClusters(this.sessionId);
      this.seq = list.seq;
      this.clusters = list.clusters;

      if (
        this.currentClusterId !== null &&
        !this.clusters.some((c) => c.cluster_id === this.currentClusterId)
      ) {
        this.currentClusterId = null;
      }

      if (this.currentClusterId === null) {
        this.vm = null;
        this.candidates = [];
      } else {
        const view = await this.api.getCluster(this.sessionId, this.currentClusterId);
        this.seq = view.seq;
        const previousSelection = this.vm?.selectedIds() ?? [];
        const vm = new ClusterViewModel(view);
        const displayed = vm.displayedIds();
        for (const id of previousSelection) {
          if (displayed.has(id)) vm.selection.add(id);
        }
        this.vm = vm;

        const similar = await this.api.similarClusters(this.sessionId, this.currentClusterId);
        this.seq = similar.seq;
        this.candidates = similar.candidates;
      }
    } catch (err) {
      this.showBanner(describeError(err));
      return;
    }
    this.render();
  }

  async openCluster(clusterId: string): Promise<void> {
    this.currentClusterId = clusterId;
    this.vm = null;
    clearContextPanel(this.contextEl);
    await this.refresh();
  }

  get openClusterId(): string | null {
    return this.currentClusterId;
  }

  get viewModel(): ClusterViewModel | null {
    return this.vm;
  }

  private buildButtons(): void {
    const specs: Array<[string, string, () => Promise<void>]> = [
      ["confirm", "Confirm cluster", () => this.confirmCurrent()],
      ["reject-all", "Reject all", () => this.rejectCurrent()],
      ["reject-selected", "Reject selected", () => this.rejectSelected()],
      ["split-selected", "Split selected", () => this.splitSelected()],
      ["export", "Export confirmed", () => this.exportConfirmed()],
    ];
    for (const [id, label, handler] of specs) {
      const button = document.createElement("button");
      button.dataset.action = id;
      button.textContent = label;
      button.addEventListener("click", () => void handler());
      this.buttonsEl.appendChild(button);
    }
  }

  private async confirmCurrent(): Promise<void> {
    if (this.currentClusterId === null) return;
    this.clearBanner();
    await this.dispatcher.confirmCluster(this.currentClusterId);
  }

  private async rejectCurrent(): Promise<void> {
    if (this.currentClusterId === null) return;
    this.clearBanner();
    await this.dispatcher.rejectCluster(this.currentClusterId);
  }

  private async rejectSelected(): Promise<void> {
    if (this.currentClusterId === null || this.vm === null) return;
    this.clearBanner();
    await this.dispatcher.rejectSelected(this.currentClusterId, this.vm.selectedIds());
  }

  private async splitSelected(): Promise<void> {
    if (this.currentClusterId === null || this.vm === null) return;
    this.clearBanner();
    await this.dispatcher.splitSelected(this.currentClusterId, this.vm.selectedIds());
  }

  private async exportConfirmed(): Promise<void> {
    this.clearBanner();
    const result = await this.dispatcher.exportSession();
    if (result !== null) {
      const count = Object.keys(result.identities).length;
      this.statusEl.textContent = `session ${this.sessionId} · seq ${result.seq} · exported ${count} identities`;
    }
  }

  private async handleToggle(faceId: string): Promise<void> {
    if (this.vm === null) return;
    const nowSelected = this.vm.toggle(faceId);
    if (nowSelected) {
      try {
        const response = await this.api.similarFaces(this.sessionId, faceId);
        this.seq = response.seq;
        this.vm.setSimilar(response.faces);
      } catch (err) {
        this.showBanner(describeError(err));
      }
    } else if (this.vm.selection.size === 0) {
      this.vm.clearSimilar();
    }
    this.renderGrid();
  }

  private async handleContext(faceId: string): Promise<void> {
    try {
      const context = await this.api.faceContext(this.sessionId, faceId);
      this.seq = context.seq;
      renderContextPanel(this.contextEl, context);
    } catch (err) {
      this.showBanner(describeError(err));
    }
  }

  private async handleMergePick(candidate: MergeCandidate): Promise<void> {
    if (this.currentClusterId === null) return;
    this.clearBanner();
    if (candidate.conflict) {
      const proceed = await this.prompts.confirmDialog(
        `cluster ${candidate.cluster_id} shares a source image with ` +
          `${this.currentClusterId}, so the service will refuse this merge. Try anyway?`,
      );
      if (!proceed) return;
    }
    await this.dispatcher.mergeClusters(this.currentClusterId, candidate.cluster_id);
  }

  private render(): void {
    this.statusEl.textContent = `session ${this.sessionId} · seq ${this.seq}`;
    this.renderSidebar();
    this.renderGrid();
    renderMergePanel(this.mergeEl, this.candidates, (candidate) =>
      void this.handleMergePick(candidate),
    );
  }

  private renderSidebar(): void {
    this.sidebarEl.replaceChildren();
    for (const summary of this.clusters) {
      const item = document.createElement("div");
      item.className =
        summary.cluster_id === this.currentClusterId
          ? `cluster-item ${summary.status} open`
          : `cluster-item ${summary.status}`;
      item.dataset.clusterId = summary.cluster_id;
      item.textContent = `${summary.cluster_id} · ${summary.status} · ${summary.size} faces`;
      item.addEventListener("click", () => void this.openCluster(summary.cluster_id));
      this.sidebarEl.appendChild(item);
    }
  }

  private renderGrid(): void {
    if (this.vm === null) {
      this.gridEl.replaceChildren();
      const note = document.createElement("div");
      note.className = "grid-empty";
      note.textContent = "select a cluster to review";
      this.gridEl.appendChild(note);
      return;
    }
    renderClusterGrid(this.gridEl, this.vm, {
      onToggle: (faceId) => void this.handleToggle(faceId),
      onContext: (faceId) => void this.handleContext(faceId),
    });
  }

  private showBanner(message: string): void {
    this.bannerEl.textContent = message;
    this.bannerEl.classList.add("visible");
  }

  private clearBanner(): void {
    this.bannerEl.textContent = "";
    this.bannerEl.classList.remove("visible");
  }
}

function child(parent: HTMLElement, tag: string, className: string): HTMLElement {
  const el = document.createElement(tag);
  el.className = className;
  parent.appendChild(el);
  return el;
}

function describeError(err: unknown): string {
  if (err instanceof Error && err.name === "ApiError") return err.message;
  const message = err instanceof Error ? err.message : String(err);
  return `service unreachable: ${message}`;
}

/** Entry point for the static page: connects to the service named in the
 *  query string, e.g. ?base=http://localhost:8321&session=s0001. */
export async function boot(root: HTMLElement): Promise<App> {
  const params = new URLSearchParams(window.location.search);
  const base = params.get("base") ?? "http://localhost:8321";
  const session = params.get("session") ?? "s0001";
  const app = new App(root, new CurationApi(base), session);
  await app.start();
  return app;
}
