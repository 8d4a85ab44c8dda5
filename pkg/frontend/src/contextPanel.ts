/** Shows where a face came from: the source image reference, capture time,
 *  and the other faces detected in the same photo. Opened by right-clicking
 *  a tile in the grid. */

import type { FaceContext } from "./models.js";

export function renderContextPanel(container: HTMLElement, context: FaceContext): void {
  container.replaceChildren();

  const title = document.createElement("div");
  title.className = "context-title";
  title.textContent = `face ${context.face_id}`;
  container.appendChild(title);

  const image = document.createElement("img");
  image.className = "context-image";
  image.src = context.image_ref;
  image.alt = `source image ${context.image_id}`;
  container.appendChild(image);

  const meta = document.createElement("div");
  meta.className = "context-meta";
  meta.textContent = `image ${context.image_id} at t=${context.capture_time}`;
  container.appendChild(meta);

  const siblings = document.createElement("div");
  siblings.className = "context-siblings";
  siblings.textContent =
    context.siblings.length === 0
      ? "no other faces in this photo"
      : `${context.siblings.length} other face(s) in this photo: ${context.siblings.join(", ")}`;
  container.appendChild(siblings);
}

export function clearContextPanel(container: HTMLElement): void {
  container.replaceChildren();
}
