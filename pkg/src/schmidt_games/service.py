"""HTTP game service: the engine behind interactive (human) player-B sessions.

Versioned JSON API under /v1.  Geometry in state views is serialized twice:
exact rational strings for replay and float approximations for rendering.
Per-game turn order is serialized with a lock; the server itself is a
threading HTTP server from the standard library.
"""

from __future__ import annotations

import json
import threading
import uuid
from fractions import Fraction
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Dict, Optional, Tuple

from .engine import (
    BStrategy,
    FormalBall,
    GameParams,
    GameState,
    new_game,
    parse_center,
    parse_fraction,
)
from .errors import InconsistentParams, SchmidtGameError
from .geometry import Box, Cylinder, Slab, psi_eval
from .instances import get_instance, list_instances
from .verify import badness_certificate, default_horizon, transcript_audit


class GameHub:
    """All live sessions; every state transition holds the game's lock."""

    def __init__(self):
        self.games: Dict[str, GameState] = {}
        self.locks: Dict[str, threading.Lock] = {}
        self.finished: Dict[str, object] = {}
        self._create_lock = threading.Lock()

    def create(self, instance_id: str, b: Optional[str], variant: str,
               seed: int) -> Tuple[str, GameState]:
        inst = get_instance(instance_id)
        params = GameParams(
            variant=variant,
            b=parse_fraction(b) if b else inst.default_b,
            seed=seed,
        )
        g = new_game(inst, params, BStrategy.external())
        while g.status == "awaiting-A":
            g.step()
        gid = uuid.uuid4().hex[:12]
        with self._create_lock:
            self.games[gid] = g
            self.locks[gid] = threading.Lock()
        return gid, g

    def get(self, gid: str) -> GameState:
        if gid not in self.games:
            raise KeyError(gid)
        return self.games[gid]

    def lock(self, gid: str) -> threading.Lock:
        return self.locks[gid]


def state_view(gid: str, g: GameState) -> dict:
    ball = g.ball
    spec = g.instance.spec
    region = psi_eval(spec, ball)
    view = {
        "game_id": gid,
        "instance_id": g.instance.id,
        "status": g.status,
        "round": g.k,
        "m_star": g.m_star,
        "winning_constant": _fs(g.constant()),
        "current_ball": _ball_json(ball, spec),
        "last_rejection": g.last_rejection,
    }
    if spec.kind != "shift":
        view["current_region"] = _region_json(region)
    if g.plan is not None:
        view["legal_window"] = {
            "lo": _fs(g.ball.t + g.plan.window_lo),
            "hi": _fs(g.ball.t + g.plan.window_hi),
        }
        view["obstacle"] = {
            "kind": g.plan.obstacle_kind,
            "count": g.plan.obstacle_count,
            "deletion_height": _fs(g.plan.deletion_height),
            "pieces": [_piece_json(p) for p in g.plan.obstacle[:256]],
        }
    return view


def _fs(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def _ball_json(ball: FormalBall, spec) -> dict:
    if ball.center.word is not None:
        return {"center": [str(s) for s in ball.center.word],
                "t": _fs(ball.t)}
    return {
        "center": [_fs(c) for c in ball.center.coords],
        "center_float": [float(c) for c in ball.center.coords],
        "t": _fs(ball.t),
        "t_float": float(ball.t),
    }


def _region_json(region) -> dict:
    if isinstance(region, Cylinder):
        return {"kind": "cylinder", "word": list(region.word)}
    hull = region.rational_hull(64)
    return {
        "kind": "box",
        "axes": [[_fs(lo), _fs(hi)] for lo, hi in hull],
        "axes_float": [[float(lo), float(hi)] for lo, hi in hull],
    }


def _piece_json(piece) -> dict:
    if isinstance(piece, Cylinder):
        return {"kind": "cylinder", "word": list(piece.word)}
    if isinstance(piece, Box):
        return _region_json(piece)
    assert isinstance(piece, Slab)
    out = {
        "kind": "slab",
        "normal": [_fs(a) for a in piece.normal],
        "offset": _fs(piece.offset),
        "halfwidth_float": piece.halfwidth.approx(),
    }
    if piece.bbox is not None:
        out["bbox"] = _region_json(piece.bbox)
    return out


class Handler(BaseHTTPRequestHandler):
    hub: GameHub = None  # injected by serve()

    def log_message(self, fmt, *args):  # quiet by default
        pass

    # -- helpers -------------------------------------------------------------
    def _json(self, code: int, payload: dict) -> None:
        blob = json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"
        self.send_response(code)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(blob)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(blob.encode())

    def _raw(self, code: int, blob: str) -> None:
        self.send_response(code)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(blob.encode())))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(blob.encode())

    def _body(self) -> dict:
        n = int(self.headers.get("Content-Length") or 0)
        if not n:
            return {}
        return json.loads(self.rfile.read(n))

    # -- routes ---------------------------------------------------------------
    def do_GET(self):
        parts = [p for p in self.path.split("/") if p]
        if parts[:2] == ["v1", "instances"] and len(parts) == 2:
            cat = []
            for iid in list_instances():
                inst = get_instance(iid)
                cat.append({
                    "id": iid,
                    "spec_kind": inst.spec.kind,
                    "dim": inst.spec.dim,
                    "b_star": _fs(inst.witness.b_star),
                    "default_b": _fs(inst.default_b),
                    "default_rounds": inst.default_rounds,
                    "strategy": inst.strategy_mode,
                })
            self._json(200, {"instances": cat})
            return
        if parts[:2] == ["v1", "games"] and len(parts) >= 3:
            gid = parts[2]
            try:
                g = self.hub.get(gid)
            except KeyError:
                self._json(404, {"error": "unknown game"})
                return
            if len(parts) == 3:
                with self.hub.lock(gid):
                    self._json(200, state_view(gid, g))
                return
            if parts[3] == "transcript":
                with self.hub.lock(gid):
                    self._raw(200, g.snapshot().dumps())
                return
        self._json(404, {"error": "no such route"})

    def do_POST(self):
        parts = [p for p in self.path.split("/") if p]
        if parts[:2] == ["v1", "games"] and len(parts) == 2:
            body = self._body()
            try:
                gid, g = self.hub.create(
                    body.get("instance_id", "farey-r1"),
                    body.get("b"),
                    body.get("variant", "weak"),
                    int(body.get("seed", 0)),
                )
            except (InconsistentParams, SchmidtGameError) as exc:
                self._json(422, {"error": str(exc)})
                return
            self._json(200, {"game_id": gid, "state": state_view(gid, g)})
            return
        if parts[:2] == ["v1", "games"] and len(parts) == 4:
            gid = parts[2]
            try:
                g = self.hub.get(gid)
            except KeyError:
                self._json(404, {"error": "unknown game"})
                return
            if parts[3] == "move":
                body = self._body()
                with self.hub.lock(gid):
                    if g.status not in ("awaiting-B", "awaiting-external"):
                        self._json(409, {"error": "move out of turn",
                                         "status": g.status})
                        return
                    try:
                        shift = g.instance.spec.kind == "shift"
                        ball = FormalBall(parse_center(body["center"], shift),
                                          parse_fraction(body["t"]))
                    except Exception as exc:
                        self._json(422, {"accepted": False,
                                         "reason": f"Malformed({exc})"})
                        return
                    ok, reason = g.submit_move(ball)
                    if ok:
                        while g.status == "awaiting-A":
                            g.step()
                        self._json(200, {"accepted": True, "reason": None,
                                         "state": state_view(gid, g)})
                    else:
                        self._json(422, {"accepted": False, "reason": reason,
                                         "state": state_view(gid, g)})
                return
            if parts[3] == "finish":
                with self.hub.lock(gid):
                    g.status = "finished"
                    tr = g.snapshot()
                    inst = g.instance
                    outcome = psi_eval(inst.spec, tr.deepest)
                    cert = badness_certificate(outcome, inst.family, inst.spec,
                                               tr.constant, default_horizon(tr),
                                               transcript_ref=gid)
                    self._json(200, {"transcript": tr.to_json(),
                                     "certificate": cert.to_json(),
                                     "verdict": cert.verdict})
                return
        self._json(404, {"error": "no such route"})


def make_server(port: int) -> ThreadingHTTPServer:
    hub = GameHub()
    handler = type("BoundHandler", (Handler,), {"hub": hub})
    return ThreadingHTTPServer(("127.0.0.1", port), handler)


def serve(port: int) -> None:
    httpd = make_server(port)
    print(f"serving on http://127.0.0.1:{port}/v1 (Ctrl-C stops)")
    try:
        httpd.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        httpd.server_close()
