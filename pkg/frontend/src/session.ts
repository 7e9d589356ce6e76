/** One interactive session: the human is player B, the server is player A
 *  plus referee.  The client pre-validates only the height window; every
 *  other legality question goes to the server, whose answer is final. */

import { ApiClient, MoveResult, StateView } from "./api.js";
import { cmp, Frac, fracStr, parseFrac } from "./frac.js";

export interface RejectionBanner {
  reason: string;
  clientSide: boolean;
}

export class Session {
  state: StateView | null = null;
  gameId = "";
  rejection: RejectionBanner | null = null;
  accepted = 0;
  rejected = 0;

  constructor(readonly api: ApiClient) {}

  async open(instanceId: string,
             opts: { b?: string; seed?: number; variant?: string } = {}):
      Promise<StateView> {
    const r = await this.api.createGame(instanceId, opts);
    this.gameId = r.game_id;
    this.state = r.state;
    return r.state;
  }

  legalWindow(): { lo: Frac; hi: Frac } | null {
    const w = this.state?.legal_window;
    if (!w) return null;
    return { lo: parseFrac(w.lo), hi: parseFrac(w.hi) };
  }

  /** Client-side pre-validation: the height window only (exact match with
   *  the server rule); anything subtler is left to the server. */
  heightInWindow(t: Frac): boolean {
    const w = this.legalWindow();
    if (!w) return false;
    return cmp(t, w.lo) >= 0 && cmp(t, w.hi) <= 0;
  }

  async submit(center: string[], t: Frac): Promise<MoveResult> {
    if (!this.heightInWindow(t)) {
      this.rejected += 1;
      this.rejection = { reason: "HeightWindow", clientSide: true };
      return { accepted: false, reason: "HeightWindow" };
    }
    const res = await this.api.move(this.gameId, center, fracStr(t));
    if (res.accepted) {
      this.accepted += 1;
      this.rejection = null;
      this.state = res.state ?? this.state;
    } else {
      this.rejected += 1;
      this.rejection = { reason: res.reason ?? "unknown", clientSide: false };
      if (res.state) this.state = res.state;
    }
    return res;
  }

  async refresh(): Promise<StateView> {
    this.state = await this.api.state(this.gameId);
    return this.state;
  }

  async endgame(): Promise<{ constant: string; verdict: boolean;
                             certificate: Record<string, unknown> }> {
    const fin = await this.api.finish(this.gameId);
    const constant = (fin.transcript as { outcome: { winning_constant: string } })
      .outcome.winning_constant;
    return { constant, verdict: fin.verdict, certificate: fin.certificate };
  }

  async transcriptBytes(): Promise<string> {
    return this.api.transcriptRaw(this.gameId);
  }
}

/** Pick a legal cylinder extension for shift instances: extend the current
 *  word to the requested depth dodging every obstacle cylinder.  Pure. */
export function pickShiftExtension(state: StateView, targetDepth: number,
                                   alphabet: number): string[] | null {
  const base = state.current_ball.center.map((s) => parseInt(s, 10));
  const curDepth = Number(parseFrac(state.current_ball.t).n);
  const head = base.slice(0, curDepth);
  const obstacles = (state.obstacle?.pieces ?? [])
    .filter((p) => p.kind === "cylinder")
    .map((p) => p.word as number[]);
  const extLen = targetDepth - curDepth;
  const total = alphabet ** extLen;
  for (let code = 0; code < total; code++) {
    const ext: number[] = [];
    let c = code;
    for (let i = 0; i < extLen; i++) {
      ext.push(c % alphabet);
      c = Math.floor(c / alphabet);
    }
    const word = head.concat(ext);
    const clash = obstacles.some((o) => {
      const k = Math.min(o.length, word.length);
      for (let i = 0; i < k; i++) if (o[i] !== word[i]) return false;
      return true;
    });
    if (!clash) return word.map(String);
  }
  return null;
}
