/** Shared fixture and DOM helpers for the UI tests. */

import { CurationApi } from "../src/api.js";
import { App } from "../src/app.js";
import type { ConfirmPrompt } from "../src/actions.js";
import { FakeCurationService, type FaceSpec } from "./fakeService.js";

/**
 * Standard review session:
 *  - cluster A: seven faces, qualities strictly descending a0..a6; a0, a1,
 *    a2, a3 sit close together while a4, a5, a6 are farther out, so
 *    similar-face lookups from a0 flag exactly a1, a2, a3
 *  - two unassigned faces (u0, u1) near A's centroid => potential tiles;
 *    u_far is out of range
 *  - cluster B: nearest merge candidate, no shared images
 *  - cluster C: far away, and c0 shares image img_shared with a0, so the
 *    service flags a conflict for the A+C merge
 */
export function standardFaces(): {
  faces: Map<string, FaceSpec>;
  clusters: Record<string, string[]>;
  unassigned: string[];
} {
  const faces = new Map<string, FaceSpec>([
    ["a0", { image_id: "img_shared", quality_score: 0.95, x: 0 }],
    ["a1", { image_id: "ia1", quality_score: 0.9, x: 1 }],
    ["a2", { image_id: "ia2", quality_score: 0.85, x: 2 }],
    ["a3", { image_id: "ia3", quality_score: 0.8, x: 3 }],
    ["a4", { image_id: "ia4", quality_score: 0.75, x: 60 }],
    ["a5", { image_id: "ia5", quality_score: 0.7, x: 61 }],
    ["a6", { image_id: "ia6", quality_score: 0.65, x: 62 }],
    ["b0", { image_id: "ib0", quality_score: 0.9, x: 90 }],
    ["b1", { image_id: "ib1", quality_score: 0.8, x: 91 }],
    ["b2", { image_id: "ib2", quality_score: 0.7, x: 92 }],
    ["c0", { image_id: "img_shared", quality_score: 0.9, x: 200 }],
    ["c1", { image_id: "ic1", quality_score: 0.8, x: 201 }],
    ["u0", { image_id: "iu0", quality_score: 0.5, x: 20 }],
    ["u1", { image_id: "iu1", quality_score: 0.55, x: 80 }],
    ["u_far", { image_id: "iuf", quality_score: 0.6, x: 400 }],
  ]);
  return {
    faces,
    clusters: { A: ["a0", "a1", "a2", "a3", "a4", "a5", "a6"], B: ["b0", "b1", "b2"], C: ["c0", "c1"] },
    unassigned: ["u0", "u1", "u_far"],
  };
}

export function standardService(): FakeCurationService {
  const { faces, clusters, unassigned } = standardFaces();
  return new FakeCurationService("s0001", "evt", faces, clusters, unassigned);
}

/** A session holding a single cluster, for the empty-merge-panel case. */
export function singleClusterService(): FakeCurationService {
  const { faces } = standardFaces();
  return new FakeCurationService(
    "s0001",
    "evt",
    faces,
    { A: ["a0", "a1", "a2", "a3", "a4", "a5", "a6"] },
    [],
  );
}

export interface Harness {
  app: App;
  root: HTMLElement;
  fake: FakeCurationService;
  prompt: ConfirmPrompt & { calls: string[] };
}

export async function mountApp(
  fake: FakeCurationService,
  promptAnswer: boolean | ((message: string) => boolean) = true,
): Promise<Harness> {
  document.body.innerHTML = '<div id="app"></div>';
  const root = document.getElementById("app")!;
  const calls: string[] = [];
  const prompt = Object.assign(
    (message: string): boolean => {
      calls.push(message);
      return typeof promptAnswer === "function" ? promptAnswer(message) : promptAnswer;
    },
    { calls },
  );
  const api = new CurationApi("http://fake", fake.fetch);
  const app = new App(root, api, fake.sessionId, { confirmDialog: prompt });
  await app.start();
  return { app, root, fake, prompt };
}

/** Let every pending promise chain settle (fake responses resolve
 *  immediately, so two macrotask turns are plenty). */
export async function settle(): Promise<void> {
  await new Promise((resolve) => setTimeout(resolve, 0));
  await new Promise((resolve) => setTimeout(resolve, 0));
}

export function tiles(root: HTMLElement): HTMLElement[] {
  return [...root.querySelectorAll<HTMLElement>(".face-tile")];
}

export function tileOf(root: HTMLElement, faceId: string): HTMLElement {
  const el = root.querySelector<HTMLElement>(`.face-tile[data-face-id="${faceId}"]`);
  if (el === null) throw new Error(`no tile for face ${faceId}`);
  return el;
}

export function candidateItems(root: HTMLElement): HTMLElement[] {
  return [...root.querySelectorAll<HTMLElement>(".merge-candidate")];
}

export function banner(root: HTMLElement): HTMLElement {
  return root.querySelector<HTMLElement>(".error-banner")!;
}

export function clickButton(root: HTMLElement, action: string): void {
  const button = root.querySelector<HTMLButtonElement>(`button[data-action="${action}"]`);
  if (button === null) throw new Error(`no button ${action}`);
  button.click();
}

export function leftClick(el: HTMLElement): void {
  el.dispatchEvent(new MouseEvent("click", { bubbles: true }));
}

export function rightClick(el: HTMLElement): void {
  el.dispatchEvent(new MouseEvent("contextmenu", { bubbles: true, cancelable: true }));
}
