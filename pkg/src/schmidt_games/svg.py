"""Deterministic SVG snapshots of game rounds on the line or the plane."""

from __future__ import annotations

from fractions import Fraction
from typing import List, Optional

from .engine import Instance, Transcript
from .errors import UnsupportedSupport
from .exactnum import LogVal
from .families import members_up_to
from .geometry import Box, Slab, psi_eval
from .strategy import strong_strategy_step, weak_strategy_step

W, H = 800, 400


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def render_round(transcript: Transcript, instance: Instance, round_k: int) -> str:
    if instance.spec.kind == "shift":
        raise UnsupportedSupport("shift games have no planar snapshot")
    b_balls = [m.ball for m in transcript.moves if m.role == "B"]
    if not (1 <= round_k <= len(b_balls)):
        raise ValueError(f"round {round_k} outside 1..{len(b_balls)}")
    balls = b_balls[:round_k]
    current = balls[-1]
    dim = instance.spec.dim
    view = psi_eval(instance.spec, balls[0]).approx()
    pad = 0.05 * (view[0][1] - view[0][0]) or 0.1
    x0, x1 = view[0][0] - pad, view[0][1] + pad
    if dim == 2:
        y0, y1 = view[1][0] - pad, view[1][1] + pad
    else:
        y0, y1 = -0.5, 0.5

    def sx(x: float) -> float:
        return (x - x0) / (x1 - x0) * W

    def sy(y: float) -> float:
        return H - (y - y0) / (y1 - y0) * H

    parts: List[str] = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
        f'viewBox="0 0 {W} {H}">',
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
    ]
    # nested balls
    for i, ball in enumerate(balls):
        bb = psi_eval(instance.spec, ball).approx()
        xa, xb = sx(bb[0][0]), sx(bb[0][1])
        if dim == 2:
            ya, yb = sy(bb[1][1]), sy(bb[1][0])
        else:
            ya, yb = H * 0.35, H * 0.65
        parts.append(
            f'<rect class="ball" x="{_fmt(xa)}" y="{_fmt(ya)}" '
            f'width="{_fmt(max(xb - xa, 0.5))}" height="{_fmt(max(yb - ya, 0.5))}" '
            f'fill="none" stroke="#3366aa" stroke-width="1"/>')
    # the plan for the displayed round, recomputed deterministically
    plan = _plan_at(instance, current, transcript)
    for piece in plan.obstacle:
        if isinstance(piece, Box):
            bb = piece.approx()
            xa, xb = sx(bb[0][0]), sx(bb[0][1])
            if dim == 2:
                ya, yb = sy(bb[1][1]), sy(bb[1][0])
            else:
                ya, yb = H * 0.45, H * 0.55
            parts.append(
                f'<rect class="obstacle" x="{_fmt(xa)}" y="{_fmt(ya)}" '
                f'width="{_fmt(max(xb - xa, 0.5))}" height="{_fmt(max(yb - ya, 0.5))}" '
                f'fill="#cc3333" fill-opacity="0.35"/>')
        elif isinstance(piece, Slab) and dim == 2:
            bb = piece.bbox.approx() if piece.bbox else ((x0, x1), (y0, y1))
            xa, xb = sx(bb[0][0]), sx(bb[0][1])
            ya, yb = sy(bb[1][1]), sy(bb[1][0])
            parts.append(
                f'<rect class="obstacle" x="{_fmt(xa)}" y="{_fmt(ya)}" '
                f'width="{_fmt(max(xb - xa, 0.5))}" height="{_fmt(max(yb - ya, 0.5))}" '
                f'fill="#cc3333" fill-opacity="0.35"/>')
    # resonant members with sizes <= t_k inside the view
    hull = tuple((Fraction(int(v[0] * 10**6) - 1, 10**6),
                  Fraction(int(v[1] * 10**6) + 1, 10**6)) for v in view)
    try:
        ms = members_up_to(instance.family, hull, LogVal(current.t))
    except Exception:
        ms = []
    for m in sorted(ms, key=lambda m: str(m.key())):
        if m.point is None:
            continue
        cx = sx(float(m.point[0]))
        cy = sy(float(m.point[1])) if dim == 2 else H * 0.5
        parts.append(f'<circle class="resonant" cx="{_fmt(cx)}" cy="{_fmt(cy)}" '
                     f'r="2.5" fill="#222222"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _plan_at(instance: Instance, ball, transcript: Transcript):
    if instance.strategy_mode == "weak" or instance.witness.strength != "strong":
        return weak_strategy_step(instance.support, instance.spec, instance.family,
                                  instance.witness, ball, transcript.params.b,
                                  transcript.m_star, 1)
    return strong_strategy_step(instance.support, instance.spec, instance.family,
                                instance.witness, ball, transcript.params.b, 1)
