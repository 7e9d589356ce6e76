/** Browser bootstrap: wire the session to a page with a number-line /
 *  plane / prefix-tree view, a move form, and the endgame panel.
 *
 *  All game logic lives in session.ts and render.ts; this file only moves
 *  data between the DOM and those modules, so the testable surface stays
 *  free of browser types.
 */

import { ApiClient } from "./api.js";
import { fracStr, parseFrac, snapToGrid } from "./frac.js";
import { renderState, sceneToSvg } from "./render.js";
import { Session } from "./session.js";

const $ = (id: string) => document.getElementById(id) as HTMLElement;

export async function boot(baseUrl: string): Promise<void> {
  const api = new ApiClient(baseUrl);
  const session = new Session(api);
  const instances = await api.instances();
  const select = $("instance") as HTMLSelectElement;
  for (const info of instances) {
    const opt = document.createElement("option");
    opt.value = info.id;
    opt.textContent = `${info.id} (${info.spec_kind}, b=${info.default_b})`;
    select.appendChild(opt);
  }

  const redraw = () => {
    if (!session.state) return;
    $("scene").innerHTML = sceneToSvg(renderState(session.state));
    const w = session.state.legal_window;
    $("window").textContent = w ? `legal heights: [${w.lo}, ${w.hi}]` : "";
    $("status").textContent =
      `round ${session.state.round} | ${session.state.status}` +
      (session.rejection
        ? ` | rejected: ${session.rejection.reason}` +
          (session.rejection.clientSide ? " (blocked client-side)" : "")
        : "");
  };

  ($("open") as HTMLButtonElement).onclick = async () => {
    await session.open(select.value);
    redraw();
  };

  ($("submit") as HTMLButtonElement).onclick = async () => {
    const centerRaw = ($("center") as HTMLInputElement).value.trim();
    const tRaw = ($("height") as HTMLInputElement).value.trim();
    const center = centerRaw.split(",").map((s) => {
      const part = s.trim();
      return part.includes("/") || !part.includes(".")
        ? part
        : fracStr(snapToGrid(parseFloat(part), 20));
    });
    await session.submit(center, parseFrac(tRaw));
    redraw();
  };

  ($("finish") as HTMLButtonElement).onclick = async () => {
    const end = await session.endgame();
    $("endgame").textContent =
      `winning constant c = ${end.constant}; certificate ` +
      `${end.verdict ? "PASSES" : "FAILS"} ` +
      JSON.stringify(end.certificate);
  };
}
