/**
 * Read-only SVG rendering of a patch. Nodes sit on the same deterministic
 * grid the Max-dialect emitter uses for layout-free graphs, so what the
 * rater sees matches what a patch editor would open.
 */

import type { PatchDoc } from "./api.js";

const GRID_X0 = 40;
const GRID_DX = 160;
const GRID_COLS = 5;
const GRID_Y0 = 40;
const GRID_DY = 120;
const BOX_W = 120;
const BOX_H = 22;
const PADDING = 40;

export interface PlacedNode {
  id: string;
  label: string;
  x: number;
  y: number;
}

export function gridPosition(index: number): { x: number; y: number } {
  return {
    x: GRID_X0 + GRID_DX * (index % GRID_COLS),
    y: GRID_Y0 + GRID_DY * Math.floor(index / GRID_COLS),
  };
}

export function placeNodes(patch: PatchDoc): PlacedNode[] {
  return patch.nodes.map((node, index) => {
    const { x, y } = gridPosition(index);
    const params = node.params.map((p) => `${p}`).join(" ");
    return { id: node.id, label: params ? `${node.type} ${params}` : node.type, x, y };
  });
}

function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Build the patch view as an SVG string (easy to test, trivial to mount). */
export function patchSvg(patch: PatchDoc): string {
  const placed = placeNodes(patch);
  const byId = new Map(placed.map((p) => [p.id, p]));
  const width = Math.max(...placed.map((p) => p.x + BOX_W), 200) + PADDING;
  const height = Math.max(...placed.map((p) => p.y + BOX_H), 100) + PADDING;

  const edges = patch.edges
    .map((edge) => {
      const src = byId.get(edge.from[0]);
      const dst = byId.get(edge.to[0]);
      if (!src || !dst) {
        return "";
      }
      const x1 = src.x + BOX_W / 2 + 8 * edge.from[1];
      const y1 = src.y + BOX_H;
      const x2 = dst.x + BOX_W / 2 + 8 * edge.to[1];
      const y2 = dst.y;
      return `<line x1="${x1}" y1="${y1}" x2="${x2}" y2="${y2}" class="patch-edge"/>`;
    })
    .join("");

  const boxes = placed
    .map(
      (node) =>
        `<g class="patch-node" data-node-id="${escapeXml(node.id)}">` +
        `<rect x="${node.x}" y="${node.y}" width="${BOX_W}" height="${BOX_H}" rx="3"/>` +
        `<text x="${node.x + 6}" y="${node.y + 15}">${escapeXml(node.label)}</text>` +
        `</g>`
    )
    .join("");

  return (
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${width} ${height}" ` +
    `class="patch-view" role="img" aria-label="patch graph">${edges}${boxes}</svg>`
  );
}
