"""Command-line entry points.

Exit codes: 0 success, 2 configuration error, 3 game/enumeration error,
4 audit failure, 5 certificate or dimension failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import List, Optional

from .engine import (
    BStrategy,
    FormalBall,
    GameParams,
    Transcript,
    new_game,
    parse_center,
    parse_fraction,
    transcript_from_json,
)
from .errors import (
    AuditFailure,
    BStalled,
    ChildCountCollapse,
    EnumerationBudgetExceeded,
    IllegalMove,
    InconsistentParams,
    NoAvoidingBall,
    SchmidtGameError,
    UnsupportedSupport,
)
from .exactnum import LogVal
from .instances import get_instance, list_instances, load_config
from .verify import (
    badness_certificate,
    cf_bound_from_constant,
    cf_oracle,
    default_horizon,
    dimension_lower_bound,
    shift_check,
    toral_check,
    transcript_audit,
    weighted_bad_check,
)

EXIT_CONFIG, EXIT_GAME, EXIT_AUDIT, EXIT_CERT = 2, 3, 4, 5


def _instance_from_args(args):
    if getattr(args, "config", None):
        return load_config(args.config)
    return get_instance(args.instance)


def _load_script(path: str, shift: bool) -> List[FormalBall]:
    with open(path) as fh:
        rows = json.load(fh)
    return [FormalBall(parse_center(r["center"], shift), parse_fraction(r["t"]))
            for r in rows]


def cmd_play(args) -> int:
    try:
        inst = _instance_from_args(args)
        b = parse_fraction(args.b) if args.b else inst.default_b
        params = GameParams(
            variant=args.variant,
            b=b,
            a=parse_fraction(args.a) if args.a else None,
            t1=parse_fraction(args.t1) if args.t1 else None,
            seed=args.seed,
            max_rounds=max(args.rounds, 512),
        )
        if args.b_strategy.startswith("scripted:"):
            script = _load_script(args.b_strategy.split(":", 1)[1],
                                  inst.spec.kind == "shift")
            bs = BStrategy.scripted(script)
        elif args.b_strategy == "greedy":
            bs = BStrategy.greedy()
        else:
            bs = BStrategy.random()
        g = new_game(inst, params, bs)
    except (InconsistentParams, FileNotFoundError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        tr = g.run(args.rounds)
    except (BStalled, IllegalMove, NoAvoidingBall, EnumerationBudgetExceeded) as exc:
        print(f"game error: {exc}", file=sys.stderr)
        return EXIT_GAME
    blob = tr.dumps()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(blob)
    else:
        sys.stdout.write(blob)
    deepest = tr.deepest
    c = tr.constant
    if deepest.center.word is not None:
        where = "".join(map(str, deepest.center.word[:24]))
    else:
        where = ",".join(f"{float(x):.9f}" for x in deepest.center.coords)
    print(f"instance={inst.id} rounds={args.rounds} deepest t={float(deepest.t):.4f} "
          f"center~({where}) c={c.numerator}/{c.denominator}", file=sys.stderr)
    return 0


def _family_oracle(inst, tr: Transcript, cert_ok: bool) -> bool:
    """Cross-check the certificate with the family-specific oracle."""
    from .geometry import psi_eval
    spec = inst.spec
    fam = inst.family
    deep = psi_eval(spec, tr.deepest)
    if spec.kind == "shift":
        word = tr.deepest.center.word
        c_int = -(-tr.constant.numerator // tr.constant.denominator)  # ceil
        p = fam.p
        rounds = max(1, len(word) - p - c_int - 1)
        return shift_check(word, fam.period, c_int, rounds)
    if fam.kind == "rational" and spec.dim == 1:
        hull = deep.rational_hull()
        lo, hi = hull[0]
        if not (0 < lo <= hi < 1):
            return True  # oracle applies inside the unit interval only
        try:
            got = cf_oracle(lo, hi, depth=4)
        except Exception:
            return True
        bound = cf_bound_from_constant(tr.constant, fam.offset_kind)
        return all(q <= bound for q in got["quotients"])
    if fam.kind == "rational" and spec.dim >= 2:
        got = weighted_bad_check(deep, inst.spec.weights, Q=20)
        return got["min_check_value"] is not None
    if fam.kind == "toral":
        from .exactnum import Exact
        cbar = Exact.exp(LogVal(-tr.constant) - LogVal.log(12))
        return toral_check(deep, fam, cbar, fam.K)
    return cert_ok


def cmd_verify(args) -> int:
    try:
        with open(args.transcript) as fh:
            data = json.load(fh)
        inst = get_instance(data["header"]["instance_id"]) \
            if not getattr(args, "config", None) else load_config(args.config)
        tr = transcript_from_json(data, inst)
    except (FileNotFoundError, KeyError, ValueError, InconsistentParams) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        transcript_audit(tr, inst)
    except AuditFailure as exc:
        print(f"audit failure: {exc}", file=sys.stderr)
        return EXIT_AUDIT
    from .geometry import psi_eval
    horizon = parse_fraction(args.horizon) if args.horizon else None
    hz = LogVal(horizon) if horizon is not None else default_horizon(tr)
    try:
        cert = badness_certificate(psi_eval(inst.spec, tr.deepest), inst.family,
                                   inst.spec, tr.constant, hz,
                                   transcript_ref=args.transcript)
        oracle_ok = _family_oracle(inst, tr, cert.verdict)
    except EnumerationBudgetExceeded as exc:
        print(f"budget error: {exc}", file=sys.stderr)
        return EXIT_GAME
    out = dict(cert.to_json())
    out["family_oracle"] = "pass" if oracle_ok else "fail"
    blob = json.dumps(out, sort_keys=True, separators=(",", ":")) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(blob)
    else:
        sys.stdout.write(blob)
    if not cert.verdict or not oracle_ok:
        print("certificate failure", file=sys.stderr)
        return EXIT_CERT
    print(f"verified: c={cert.to_json()['c']} horizon~{cert.to_json()['horizon']}",
          file=sys.stderr)
    return 0


def cmd_dimension(args) -> int:
    try:
        inst = _instance_from_args(args)
        b = parse_fraction(args.b) if args.b else inst.default_b
    except (InconsistentParams, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        est = dimension_lower_bound(inst, b, args.depth, level_cap=args.level_cap,
                                    seed=args.seed)
    except ChildCountCollapse as exc:
        print(f"child count collapse: {exc}", file=sys.stderr)
        return EXIT_CERT
    except SchmidtGameError as exc:
        print(f"game error: {exc}", file=sys.stderr)
        return EXIT_GAME
    blob = json.dumps(est.to_json(), sort_keys=True, separators=(",", ":")) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(blob)
    else:
        sys.stdout.write(blob)
    ok = est.empirical_slope >= est.theoretical_bound - args.tolerance
    print(f"slope={est.empirical_slope:.4f} bound={est.theoretical_bound:.4f} "
          f"{'ok' if ok else 'below bound'}", file=sys.stderr)
    return 0 if ok else EXIT_CERT


def cmd_svg(args) -> int:
    from .svg import render_round
    try:
        with open(args.transcript) as fh:
            data = json.load(fh)
        inst = get_instance(data["header"]["instance_id"])
        tr = transcript_from_json(data, inst)
        blob = render_round(tr, inst, args.round)
    except UnsupportedSupport as exc:
        print(f"unsupported support: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FileNotFoundError, ValueError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(blob)
    else:
        sys.stdout.write(blob)
    return 0


def cmd_serve(args) -> int:
    from .service import serve
    serve(args.port)
    return 0


def cmd_instances(args) -> int:
    for iid in list_instances():
        inst = get_instance(iid)
        print(f"{iid}: {inst.spec.kind} dim={inst.spec.dim} "
              f"b*={inst.witness.b_star} b={inst.default_b} "
              f"strategy={inst.strategy_mode}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="schmidt-games",
                                 description="Schmidt-game workbench")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("play", help="run one game and write its transcript")
    p.add_argument("--instance", default="farey-r1")
    p.add_argument("--config", help="instance TOML instead of a built-in id")
    p.add_argument("--rounds", type=int, default=None)
    p.add_argument("--b", default=None)
    p.add_argument("--a", default=None)
    p.add_argument("--t1", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--variant", default="weak",
                   choices=["weak", "classic", "absolute_point",
                            "absolute_hyperplane"])
    p.add_argument("--b-strategy", default="random")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_play)

    p = sub.add_parser("verify", help="audit a transcript and certify badness")
    p.add_argument("transcript")
    p.add_argument("--horizon", default=None)
    p.add_argument("--config", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("dimension", help="survivor-tree dimension lower bound")
    p.add_argument("--instance", default="shift3-periodic")
    p.add_argument("--config", default=None)
    p.add_argument("--depth", type=int, default=8)
    p.add_argument("--b", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--level-cap", type=int, default=48)
    p.add_argument("--tolerance", type=float, default=0.05)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_dimension)

    p = sub.add_parser("svg", help="deterministic snapshot of one round")
    p.add_argument("transcript")
    p.add_argument("--round", type=int, default=1)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_svg)

    p = sub.add_parser("serve", help="HTTP game service for the playground")
    p.add_argument("--port", type=int, default=8641)
    p.set_defaults(fn=cmd_serve)

    p = sub.add_parser("instances", help="list bundled instances")
    p.set_defaults(fn=cmd_instances)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.cmd == "play" and args.rounds is None:
        try:
            args.rounds = _instance_from_args(args).default_rounds
        except InconsistentParams:
            args.rounds = 16
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
