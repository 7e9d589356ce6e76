/** Pure view-model rendering: a state view becomes a scene graph, and the
 *  scene becomes SVG.  Identical payloads yield identical scenes; floats
 *  are used for pixels only. */

import { StateView } from "./api.js";

export interface SceneElement {
  kind: "ball" | "obstacle" | "resonant" | "banner" | "word";
  x: number;
  y: number;
  w: number;
  h: number;
  label?: string;
}

export interface Scene {
  mode: "line" | "plane" | "tree";
  width: number;
  height: number;
  elements: SceneElement[];
}

const W = 800;
const H = 400;

export function renderState(view: StateView): Scene {
  if (view.current_region?.kind === "cylinder" ||
      view.current_ball.center_float === undefined) {
    return renderTree(view);
  }
  const axes = view.current_region?.axes ?? [];
  return axes.length >= 2 ? renderPlane(view) : renderLine(view);
}

function floatAxes(p: { axes_float?: number[][]; axes?: string[][] }): number[][] {
  if (p.axes_float) return p.axes_float;
  return (p.axes ?? []).map((ab) => ab.map(parseRationalFloat));
}

function parseRationalFloat(s: string): number {
  const [n, d] = s.split("/");
  return Number(n) / Number(d ?? 1);
}

function renderLine(view: StateView): Scene {
  const region = floatAxes(view.current_region!);
  const [lo, hi] = region[0];
  const pad = (hi - lo) * 0.08 || 0.1;
  const x0 = lo - pad;
  const span = hi - lo + 2 * pad;
  const sx = (x: number) => ((x - x0) / span) * W;
  const els: SceneElement[] = [
    { kind: "ball", x: sx(lo), y: H * 0.4, w: sx(hi) - sx(lo), h: H * 0.2 },
  ];
  for (const piece of view.obstacle?.pieces ?? []) {
    const ax = floatAxes(piece);
    if (!ax.length) continue;
    const [a, b] = ax[0];
    els.push({ kind: "obstacle", x: sx(a), y: H * 0.45, w: Math.max(sx(b) - sx(a), 1), h: H * 0.1 });
  }
  if (view.last_rejection) {
    els.push({ kind: "banner", x: 8, y: 20, w: W - 16, h: 24,
               label: view.last_rejection });
  }
  return { mode: "line", width: W, height: H, elements: els };
}

function renderPlane(view: StateView): Scene {
  const region = floatAxes(view.current_region!);
  const [[lx, hx], [ly, hy]] = region;
  const padx = (hx - lx) * 0.08 || 0.1;
  const pady = (hy - ly) * 0.08 || 0.1;
  const sx = (x: number) => ((x - (lx - padx)) / (hx - lx + 2 * padx)) * W;
  const sy = (y: number) => H - ((y - (ly - pady)) / (hy - ly + 2 * pady)) * H;
  const els: SceneElement[] = [
    { kind: "ball", x: sx(lx), y: sy(hy), w: sx(hx) - sx(lx), h: sy(ly) - sy(hy) },
  ];
  for (const piece of view.obstacle?.pieces ?? []) {
    const src = piece.kind === "slab" && piece.bbox ? piece.bbox : piece;
    const ax = floatAxes(src as { axes_float?: number[][]; axes?: string[][] });
    if (ax.length < 2) continue;
    els.push({
      kind: "obstacle",
      x: sx(ax[0][0]), y: sy(ax[1][1]),
      w: Math.max(sx(ax[0][1]) - sx(ax[0][0]), 1),
      h: Math.max(sy(ax[1][0]) - sy(ax[1][1]), 1),
    });
  }
  if (view.last_rejection) {
    els.push({ kind: "banner", x: 8, y: 20, w: W - 16, h: 24,
               label: view.last_rejection });
  }
  return { mode: "plane", width: W, height: H, elements: els };
}

function renderTree(view: StateView): Scene {
  const word = view.current_ball.center.join("");
  const els: SceneElement[] = [
    { kind: "word", x: 10, y: 40, w: W - 20, h: 18, label: `play ${word}` },
  ];
  let row = 1;
  for (const piece of view.obstacle?.pieces ?? []) {
    if (piece.word) {
      els.push({ kind: "obstacle", x: 10, y: 40 + 22 * row, w: W - 20, h: 18,
                 label: `avoid ${piece.word.join("")}` });
      row += 1;
    }
  }
  if (view.last_rejection) {
    els.push({ kind: "banner", x: 8, y: 20, w: W - 16, h: 24,
               label: view.last_rejection });
  }
  return { mode: "tree", width: W, height: H, elements: els };
}

export function sceneToSvg(scene: Scene): string {
  const colors: Record<string, string> = {
    ball: "#3366aa", obstacle: "#cc3333", resonant: "#222222",
    banner: "#aa7700", word: "#333333",
  };
  const parts = [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${scene.width}" height="${scene.height}">`,
  ];
  for (const el of scene.elements) {
    if (el.label !== undefined) {
      parts.push(
        `<text class="${el.kind}" x="${el.x.toFixed(3)}" y="${el.y.toFixed(3)}" ` +
        `fill="${colors[el.kind]}">${el.label}</text>`);
    } else {
      parts.push(
        `<rect class="${el.kind}" x="${el.x.toFixed(3)}" y="${el.y.toFixed(3)}" ` +
        `width="${el.w.toFixed(3)}" height="${el.h.toFixed(3)}" ` +
        `fill="none" stroke="${colors[el.kind]}"/>`);
    }
  }
  parts.push("</svg>");
  return parts.join("\n");
}
