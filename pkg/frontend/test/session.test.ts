/** End-to-end scripted session against the live engine service.
 *
 * Opens a game, submits three legal and two illegal moves (one blocked by
 * the client height pre-check, one rejected 422 by the server), finishes,
 * reads the certificate, and requires the transcript to match a CLI-played
 * scripted game byte for byte.
 */

import assert from "node:assert/strict";
import { after, before, test } from "node:test";
import { spawn, spawnSync, ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { ApiClient } from "../src/api.js";
import { parseFrac, frac, add, fracStr } from "../src/frac.js";
import { pickShiftExtension, Session } from "../src/session.js";

const PORT = 8123 + (process.pid % 400);
const BASE = `http://127.0.0.1:${PORT}`;
let server: ChildProcess;

before(async () => {
  server = spawn("python3", ["-m", "schmidt_games.cli", "serve",
                             "--port", String(PORT)],
                 { stdio: ["ignore", "pipe", "pipe"] });
  const api = new ApiClient(BASE);
  for (let i = 0; i < 100; i++) {
    try {
      await api.instances();
      return;
    } catch {
      await new Promise((r) => setTimeout(r, 100));
    }
  }
  throw new Error("service did not come up");
});

after(() => {
  server.kill();
});

test("scripted session matches the CLI transcript byte for byte", async () => {
  const api = new ApiClient(BASE);
  const session = new Session(api);
  const state0 = await session.open("shift3-periodic", { b: "3/1", seed: 77 });
  assert.equal(state0.status, "awaiting-B");

  const legalMoves: { center: string[]; t: string }[] = [];
  // --- 3 legal moves, each to the top of the legal window -----------------
  for (let i = 0; i < 3; i++) {
    const state = session.state!;
    const hi = parseFrac(state.legal_window!.hi);
    const depth = Number(hi.n / hi.d);
    const word = pickShiftExtension(state, depth, 3);
    assert.ok(word, "a legal extension must exist");
    if (i === 1) {
      // --- illegal move 1: server-side 422 (deletion overlap when a piece
      // is in view; otherwise break containment by flipping a symbol) ------
      const blocked = state.obstacle!.pieces.find((p) => p.kind === "cylinder");
      if (blocked) {
        const bad = blocked.word!.map(String);
        const res = await session.submit(bad, hi);
        assert.equal(res.accepted, false);
        assert.equal(res.reason, "ObstacleOverlap");
        assert.equal(session.rejection?.clientSide, false);
      } else {
        const bad = [...word!];
        bad[0] = String((parseInt(bad[0], 10) + 1) % 3);
        const res = await session.submit(bad, hi);
        assert.equal(res.accepted, false);
        assert.equal(res.reason, "Containment");
        assert.equal(session.rejection?.clientSide, false);
      }
      // --- illegal move 2: height below the window (client pre-block) -----
      const low = add(parseFrac(state.current_ball.t), frac(1n));
      const res2 = await session.submit(word!, low);
      assert.equal(res2.accepted, false);
      assert.equal(res2.reason, "HeightWindow");
      assert.equal(session.rejection?.clientSide, true);
    }
    const res = await session.submit(word!, hi);
    assert.equal(res.accepted, true, `legal move ${i} rejected: ${res.reason}`);
    legalMoves.push({ center: word!, t: fracStr(hi) });
  }
  assert.equal(session.accepted, 3);
  assert.equal(session.rejected, 2);

  // --- finish and inspect the endgame panel data ---------------------------
  const end = await session.endgame();
  assert.equal(end.verdict, true);
  assert.equal(end.constant, session.state!.winning_constant);
  assert.equal((end.certificate as { verdict: string }).verdict, "pass");

  // --- byte-for-byte parity with the CLI ----------------------------------
  const serviceTranscript = await session.transcriptBytes();
  const parsed = JSON.parse(serviceTranscript) as {
    moves: { role: string; center: string[]; t: string }[];
  };
  const opening = parsed.moves.find((m) => m.role === "B")!;
  const script = [{ center: opening.center, t: opening.t }, ...legalMoves];
  const dir = mkdtempSync(join(tmpdir(), "playground-"));
  const scriptPath = join(dir, "script.json");
  const outPath = join(dir, "cli.json");
  writeFileSync(scriptPath, JSON.stringify(script));
  const run = spawnSync("python3", [
    "-m", "schmidt_games.cli", "play",
    "--instance", "shift3-periodic",
    "--rounds", "3",
    "--seed", "77",
    "--b", "3/1",
    "--b-strategy", `scripted:${scriptPath}`,
    "--out", outPath,
  ], { encoding: "utf8" });
  assert.equal(run.status, 0, run.stderr);
  const cliTranscript = readFileSync(outPath, "utf8");
  assert.equal(serviceTranscript, cliTranscript);
});

test("unknown game ids 404 and out-of-turn moves 409", async () => {
  const resp = await fetch(`${BASE}/v1/games/nope`);
  assert.equal(resp.status, 404);
  const api = new ApiClient(BASE);
  const g = await api.createGame("shift3-periodic", { seed: 5 });
  await api.finish(g.game_id);
  const moved = await fetch(`${BASE}/v1/games/${g.game_id}/move`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify({ center: ["0"], t: "1/1" }),
  });
  assert.equal(moved.status, 409);
});
