/** Typed client for the /v1 game service.  No geometry is recomputed here:
 *  the server's state view is authoritative and the client only parses. */

export interface BallView {
  center: string[];
  center_float?: number[];
  t: string;
  t_float?: number;
}

export interface PieceView {
  kind: "box" | "slab" | "cylinder";
  axes?: string[][];
  axes_float?: number[][];
  word?: number[];
  normal?: string[];
  offset?: string;
  halfwidth_float?: number;
  bbox?: { kind: string; axes: string[][]; axes_float: number[][] };
}

export interface ObstacleView {
  kind: string;
  count: number;
  deletion_height: string;
  pieces: PieceView[];
}

export interface StateView {
  game_id: string;
  instance_id: string;
  status: string;
  round: number;
  m_star: number;
  winning_constant: string;
  current_ball: BallView;
  current_region?: { kind: string; axes?: string[][]; word?: number[] };
  legal_window?: { lo: string; hi: string };
  obstacle?: ObstacleView;
  last_rejection?: string | null;
}

export interface MoveResult {
  accepted: boolean;
  reason: string | null;
  state?: StateView;
}

export interface InstanceInfo {
  id: string;
  spec_kind: string;
  dim: number;
  b_star: string;
  default_b: string;
  default_rounds: number;
  strategy: string;
}

export class ApiClient {
  constructor(readonly baseUrl: string) {}

  private async json<T>(method: string, path: string, body?: unknown,
                        okCodes: number[] = [200]): Promise<{ code: number; data: T }> {
    const resp = await fetch(this.baseUrl + path, {
      method,
      headers: { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const text = await resp.text();
    if (!okCodes.includes(resp.status)) {
      throw new Error(`${method} ${path}: HTTP ${resp.status}: ${text.slice(0, 200)}`);
    }
    return { code: resp.status, data: text ? JSON.parse(text) : (undefined as T) };
  }

  async instances(): Promise<InstanceInfo[]> {
    const r = await this.json<{ instances: InstanceInfo[] }>("GET", "/v1/instances");
    return r.data.instances;
  }

  async createGame(instanceId: string, opts: { b?: string; seed?: number;
                                               variant?: string } = {}):
      Promise<{ game_id: string; state: StateView }> {
    const r = await this.json<{ game_id: string; state: StateView }>(
      "POST", "/v1/games",
      { instance_id: instanceId, b: opts.b, seed: opts.seed ?? 0,
        variant: opts.variant ?? "weak" });
    return r.data;
  }

  async state(gameId: string): Promise<StateView> {
    const r = await this.json<StateView>("GET", `/v1/games/${gameId}`);
    return r.data;
  }

  async move(gameId: string, center: string[], t: string): Promise<MoveResult> {
    const r = await this.json<MoveResult>(
      "POST", `/v1/games/${gameId}/move`, { center, t }, [200, 422]);
    return r.data;
  }

  async transcriptRaw(gameId: string): Promise<string> {
    const resp = await fetch(`${this.baseUrl}/v1/games/${gameId}/transcript`);
    if (resp.status !== 200) throw new Error(`transcript: HTTP ${resp.status}`);
    return await resp.text();
  }

  async finish(gameId: string): Promise<{ transcript: unknown;
                                          certificate: Record<string, unknown>;
                                          verdict: boolean }> {
    const r = await this.json<{ transcript: unknown;
                                certificate: Record<string, unknown>;
                                verdict: boolean }>(
      "POST", `/v1/games/${gameId}/finish`);
    return r.data;
  }
}
