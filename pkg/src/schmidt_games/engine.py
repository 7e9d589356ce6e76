"""Game state machine: weak, classic and absolute variants.

One game is a strict alternation.  B opens with a formal ball; from then on
A installs a plan (deletion set + guaranteed witness ball + legal window)
and B answers with any ball the validator accepts.  Every accepted move is
recorded; transcripts replay bit-identically.

B is adversarial but untrusted: the engine validates every proposal and,
for the built-in random/greedy opponents, substitutes the plan's witness
ball after a bounded number of rejected samples (the witness ball is legal
by construction, so the game cannot stall).  Scripted and external B get no
such help.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

from .errors import (
    BStalled,
    IllegalMove,
    InconsistentParams,
    IndeterminatePredicate,
)
from .exactnum import LogVal, Rat, _as_fraction, rational_lower
from .families import Family, members_up_to
from .geometry import (
    AmbientSupport,
    Cylinder,
    FormalBall,
    Point,
    PsiSpec,
    Tri,
    contains,
    disjoint_from_all,
    psi_eval,
)
from .strategy import (
    AvoidancePlan,
    DiffusenessWitness,
    InterleavedStrategy,
    find_avoiding_ball,
    require_strong_for_classic,
    strong_strategy_step,
    weak_strategy_step,
    winning_constant,
)

B_RETRY_LIMIT = 64


# --------------------------------------------------------------------------
# Instances and parameters
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Instance:
    """Binding of support, psi, families and witness under one id."""

    id: str
    support: AmbientSupport
    spec: PsiSpec
    families: Tuple[Family, ...]
    witness: DiffusenessWitness
    strategy_mode: str = "strong"    # "strong" | "weak" | "interleaved"
    opening_box: Tuple[Tuple[Fraction, Fraction], ...] = ((Fraction(0), Fraction(1)),)
    opening_word_len: int = 8
    measure: Optional[object] = None
    default_b: Fraction = Fraction(3)
    default_rounds: int = 32
    lc_depth: Fraction = Fraction(0)  # local-containment depth for absolute play

    @property
    def family(self) -> Family:
        return self.families[0]

    def interleaved(self) -> Optional[InterleavedStrategy]:
        if self.strategy_mode != "interleaved":
            return None
        return InterleavedStrategy(self.families,
                                   tuple([self.witness] * len(self.families)))

    def min_size(self) -> LogVal:
        sizes = []
        for f in self.families:
            try:
                sizes.append(f.size_of(f.min_index))
            except (IndexError, ValueError):
                continue  # family with no members yet
        if not sizes:
            return LogVal(0)
        out = sizes[0]
        for s in sizes[1:]:
            if s.cmp(out) < 0:
                out = s
        return out


@dataclass(frozen=True)
class GameParams:
    variant: str = "weak"           # weak | classic | absolute_point | absolute_hyperplane
    b: Fraction = Fraction(3)
    a: Optional[Fraction] = None    # classic only
    a_star: Optional[Fraction] = None
    b_star: Fraction = Fraction(1)
    m_star_policy: str = "fixed_min"
    t1: Optional[Fraction] = None
    max_rounds: int = 512
    seed: int = 0

    def check(self, witness: DiffusenessWitness) -> None:
        if self.variant not in ("weak", "classic", "absolute_point",
                                "absolute_hyperplane"):
            raise InconsistentParams(f"unknown variant {self.variant!r}")
        if self.b < witness.b_star:
            raise InconsistentParams(
                f"b = {self.b} below the witness b* = {witness.b_star}")
        if self.variant == "classic":
            if self.a is None:
                raise InconsistentParams("classic games need the parameter a")
            a_star = self.a_star if self.a_star is not None else witness.b_star
            if not (self.a >= a_star >= witness.b_star):
                raise InconsistentParams("classic games need a >= a* >= b*")


# --------------------------------------------------------------------------
# B strategies
# --------------------------------------------------------------------------

@dataclass
class BStrategy:
    kind: str                  # "random" | "greedy" | "scripted" | "external"
    script: Optional[List[FormalBall]] = None
    _cursor: int = 0

    @staticmethod
    def random() -> "BStrategy":
        return BStrategy("random")

    @staticmethod
    def greedy() -> "BStrategy":
        return BStrategy("greedy")

    @staticmethod
    def scripted(moves: Sequence[FormalBall]) -> "BStrategy":
        return BStrategy("scripted", script=list(moves))

    @staticmethod
    def external() -> "BStrategy":
        return BStrategy("external")

    def next_scripted(self) -> FormalBall:
        if self.script is None or self._cursor >= len(self.script):
            raise BStalled("script exhausted")
        mv = self.script[self._cursor]
        self._cursor += 1
        return mv


# --------------------------------------------------------------------------
# Transcript
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Move:
    k: int
    role: str  # "A" | "B"
    ball: FormalBall
    plan_kind: Optional[str] = None
    plan_count: Optional[int] = None
    plan_deletion_height: Optional[Fraction] = None


@dataclass(frozen=True)
class Transcript:
    instance_id: str
    params: GameParams
    witness: DiffusenessWitness
    m_star: int
    moves: Tuple[Move, ...]
    deepest: FormalBall
    constant: Fraction
    certificate_id: Optional[str] = None

    def to_json(self) -> dict:
        return {
            "header": {
                "instance_id": self.instance_id,
                "variant": self.params.variant,
                "a": _opt_frac(self.params.a),
                "b": _frac(self.params.b),
                "a_star": _opt_frac(self.params.a_star),
                "b_star": _frac(self.witness.b_star),
                "m_star": self.m_star,
                "seed": self.params.seed,
                "witness": self.witness.as_json(),
            },
            "moves": [
                {
                    "k": m.k,
                    "role": m.role,
                    "center": _center_json(m.ball),
                    "t": _frac(m.ball.t),
                    "plan": None if m.plan_kind is None else {
                        "obstacle_kind": m.plan_kind,
                        "obstacle_count": m.plan_count,
                        "deletion_height": _frac(m.plan_deletion_height),
                    },
                }
                for m in self.moves
            ],
            "outcome": {
                "deepest_center": _center_json(self.deepest),
                "deepest_t": _frac(self.deepest.t),
                "winning_constant": _frac(self.constant),
                "certificate_id": self.certificate_id,
            },
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":")) + "\n"


def _frac(x: Fraction) -> str:
    x = _as_fraction(x)
    return f"{x.numerator}/{x.denominator}"


def _opt_frac(x):
    return None if x is None else _frac(x)


def parse_fraction(s: str) -> Fraction:
    num, _, den = s.partition("/")
    return Fraction(int(num), int(den) if den else 1)


def _center_json(ball: FormalBall):
    if ball.center.word is not None:
        return [str(s) for s in ball.center.word]
    return [_frac(c) for c in ball.center.coords]


def parse_center(items, shift: bool) -> Point:
    if shift:
        return Point.of_word([int(s) for s in items])
    return Point.euclidean(*[parse_fraction(s) for s in items])


def transcript_from_json(data: dict, instance: Instance) -> Transcript:
    h = data["header"]
    params = GameParams(
        variant=h["variant"],
        b=parse_fraction(h["b"]),
        a=None if h.get("a") is None else parse_fraction(h["a"]),
        a_star=None if h.get("a_star") is None else parse_fraction(h["a_star"]),
        seed=h["seed"],
    )
    shift = instance.spec.kind == "shift"
    moves = []
    for m in data["moves"]:
        ball = FormalBall(parse_center(m["center"], shift), parse_fraction(m["t"]))
        plan = m.get("plan")
        moves.append(Move(
            k=m["k"], role=m["role"], ball=ball,
            plan_kind=None if plan is None else plan["obstacle_kind"],
            plan_count=None if plan is None else plan["obstacle_count"],
            plan_deletion_height=None if plan is None
            else parse_fraction(plan["deletion_height"]),
        ))
    out = data["outcome"]
    deepest = FormalBall(parse_center(out["deepest_center"], shift),
                         parse_fraction(out["deepest_t"]))
    return Transcript(
        instance_id=h["instance_id"], params=params, witness=instance.witness,
        m_star=h["m_star"], moves=tuple(moves), deepest=deepest,
        constant=parse_fraction(out["winning_constant"]),
        certificate_id=out.get("certificate_id"),
    )


# --------------------------------------------------------------------------
# Game state
# --------------------------------------------------------------------------

class GameState:
    """Mutable in-flight game; transcripts snapshot it immutably."""

    def __init__(self, instance: Instance, params: GameParams,
                 b_strategy: BStrategy, opening: FormalBall, m_star: int):
        self.instance = instance
        self.params = params
        self.b_strategy = b_strategy
        self.k = 1
        self.ball = opening
        self.status = "awaiting-A"
        self.plan: Optional[AvoidancePlan] = None
        self.classic_a_ball: Optional[FormalBall] = None
        self.moves: List[Move] = [Move(k=0, role="B", ball=opening)]
        self.rng = random.Random(params.seed)
        self.m_star = m_star
        self.last_rejection: Optional[str] = None

    # -- constants ---------------------------------------------------------
    def escape_depth(self) -> int:
        inter = self.instance.interleaved()
        if inter is not None:
            return inter.escape_sum(self.m_star * self.params.b)
        if self.instance.strategy_mode == "weak":
            return self.instance.witness.escape(self.m_star * self.params.b)
        return self.instance.witness.escape(self.instance.witness.b_star)

    def constant(self) -> Fraction:
        if self.params.variant == "classic":
            b_eff = self.params.a + self.params.b
        else:
            b_eff = self.params.b
        inter = self.instance.interleaved()
        m_eff = self.m_star * (inter.n_star if inter is not None else 1)
        return winning_constant(self.escape_depth(), m_eff, b_eff)

    # -- A side --------------------------------------------------------------
    def _install_plan(self) -> None:
        inst = self.instance
        if self.params.variant == "classic":
            self._install_classic()
            return
        if self.params.variant.startswith("absolute"):
            self._install_absolute()
            return
        inter = inst.interleaved()
        if inter is not None:
            slot = inter.slot_of(self.k)
            plan = weak_strategy_step(
                inst.support, inst.spec, inter.families[slot], inst.witness,
                self.ball, self.params.b, self.m_star, self.k,
                window_width=inter.n_star,
                slot=slot,
                escape_override=inter.escape_sum(self.m_star * self.params.b))
        elif inst.strategy_mode == "weak":
            plan = weak_strategy_step(inst.support, inst.spec, inst.family,
                                      inst.witness, self.ball, self.params.b,
                                      self.m_star, self.k)
        else:
            plan = strong_strategy_step(inst.support, inst.spec, inst.family,
                                        inst.witness, self.ball, self.params.b,
                                        self.k)
        self.plan = plan
        self.moves.append(Move(
            k=self.k, role="A", ball=plan.witness_ball,
            plan_kind=plan.obstacle_kind, plan_count=plan.obstacle_count,
            plan_deletion_height=plan.deletion_height))
        self.status = "awaiting-B"

    def _install_classic(self) -> None:
        inst = self.instance
        require_strong_for_classic(inst.witness)
        base = strong_strategy_step(inst.support, inst.spec, inst.family,
                                    inst.witness, self.ball, self.params.b, self.k)
        a_ball = FormalBall(base.witness_ball.center, self.ball.t + self.params.a)
        self.plan = base
        self.classic_a_ball = a_ball
        self.moves.append(Move(
            k=self.k, role="A", ball=a_ball,
            plan_kind=base.obstacle_kind, plan_count=base.obstacle_count,
            plan_deletion_height=base.deletion_height))
        self.status = "awaiting-B"

    def _install_absolute(self) -> None:
        """Delete the psi-neighborhood of one simple set from the collection."""
        inst = self.instance
        from .families import member_neighborhood
        a_k = self.params.a if self.params.a is not None else self.params.b
        if a_k < self.params.b:
            raise InconsistentParams("absolute deletions need a_k >= b")
        zone = psi_eval(inst.spec, FormalBall(self.ball.center,
                                              self.ball.t + inst.lc_depth)) \
            if inst.spec.kind != "shift" else psi_eval(inst.spec, self.ball)
        ms = members_up_to(inst.family, zone, self.ball.t)
        if ms:
            if self.params.variant == "absolute_point" or inst.spec.kind == "shift":
                target = _nearest_member(ms, self.ball)
                pieces = (member_neighborhood(inst.spec, target,
                                              self.ball.t + a_k),)
                kind = "points" if target.point is not None else "cylinders"
            else:
                target = _hyperplane_through(inst, ms, self.ball)
                pieces = (member_neighborhood(inst.spec, target,
                                              self.ball.t + a_k),)
                kind = "slabs"
        else:
            pieces = ()
            kind = "empty"
        wball = find_avoiding_ball(inst.support, inst.spec, self.ball, pieces,
                                   self.ball.t + self.params.b)
        self.plan = AvoidancePlan(
            round_index=self.k, obstacle=pieces, obstacle_kind=kind,
            obstacle_count=len(pieces), deletion_height=self.ball.t + a_k,
            witness_ball=wball, window_lo=self.instance.witness.b_star,
            window_hi=self.params.b)
        self.moves.append(Move(
            k=self.k, role="A", ball=wball, plan_kind=kind,
            plan_count=len(pieces), plan_deletion_height=self.ball.t + a_k))
        self.status = "awaiting-B"

    # -- validation ------------------------------------------------------------
    def validate_move(self, ball: FormalBall):
        """accept (True, None) or reject (False, reason); never raises."""
        inst = self.instance
        try:
            if not inst.support.contains_point(ball.center):
                return False, "CenterOutsideSupport"
            if self.params.variant == "classic":
                expect = self.ball.t + self.params.a + self.params.b
                if ball.t != expect:
                    return False, "HeightWindow"
                inner = psi_eval(inst.spec, ball)
                if contains(psi_eval(inst.spec, self.classic_a_ball), inner) is not Tri.YES:
                    return False, "Containment"
                return True, None
            db = ball.t - self.ball.t
            if db < self.plan.window_lo or db > self.plan.window_hi:
                return False, "HeightWindow"
            inner = psi_eval(inst.spec, ball)
            if contains(psi_eval(inst.spec, self.ball), inner) is not Tri.YES:
                return False, "Containment"
            verdict = disjoint_from_all(inner, self.plan.obstacle)
            if verdict is Tri.NO:
                return False, "ObstacleOverlap"
            if verdict is Tri.UNKNOWN:
                return False, "Indeterminate"
            return True, None
        except IndeterminatePredicate:
            return False, "Indeterminate"
        except ValueError as exc:
            return False, f"Malformed({exc})"

    # -- B side ------------------------------------------------------------------
    def _b_move(self) -> Optional[FormalBall]:
        kind = self.b_strategy.kind
        if kind == "external":
            self.status = "awaiting-external"
            return None
        if kind == "scripted":
            mv = self.b_strategy.next_scripted()
            ok, reason = self.validate_move(mv)
            if not ok:
                raise BStalled(reason)
            return mv
        for _ in range(B_RETRY_LIMIT):
            cand = self._sample_candidate(kind)
            ok, _ = self.validate_move(cand)
            if ok:
                return cand
        return self.plan.witness_ball  # always legal

    def _sample_candidate(self, kind: str) -> FormalBall:
        inst = self.instance
        rng = self.rng
        if self.params.variant == "classic":
            base = self.classic_a_ball
            t = self.ball.t + self.params.a + self.params.b
            lo_b = hi_b = None
        else:
            base = self.ball
            grid = rng.randrange(17)
            db = self.plan.window_lo + (self.plan.window_hi - self.plan.window_lo) \
                * Fraction(grid, 16)
            t = self.ball.t + db
        if inst.spec.kind == "shift":
            depth = int(t)
            word = list(base.center.word[: int(base.t)])
            if kind == "greedy" and self.plan and self.plan.obstacle:
                target = self.plan.obstacle[0]
                tw = target.word if isinstance(target, Cylinder) else ()
                while len(word) < depth:
                    i = len(word)
                    word.append(tw[i] if i < len(tw) and rng.random() < 0.7
                                else rng.randrange(inst.spec.alphabet))
            else:
                while len(word) < depth:
                    word.append(rng.randrange(inst.spec.alphabet))
            return FormalBall(Point.of_word(word), Fraction(depth))
        from .strategy import _dyadic_floor
        coords = []
        for i, c in enumerate(base.center.coords):
            slack = _dyadic_floor((inst.spec.radius(i, base.t)
                                   - inst.spec.radius(i, t)).lower_rational())
            off = slack * Fraction(rng.randrange(-64, 65), 64)
            coords.append(c + off)
        if kind == "greedy" and self.plan and self.plan.obstacle:
            piece = self.plan.obstacle[0]
            aim = _piece_anchor(piece)
            if aim is not None and len(aim) == len(coords):
                mix = Fraction(rng.randrange(32, 65), 64)
                coords = [c + (a - c) * mix for c, a in zip(coords, aim)]
        if inst.support.kind == "cantor":
            coords = [_snap_cantor(coords[0], t, inst)]
        return FormalBall(Point.euclidean(*coords), t)

    # -- driver --------------------------------------------------------------------
    def step(self) -> str:
        """Advance one half-move; returns the new status."""
        if self.status == "finished":
            raise InconsistentParams("game already finished")
        if self.status == "awaiting-A":
            self._install_plan()
            return self.status
        if self.status == "awaiting-B":
            mv = self._b_move()
            if mv is None:
                return self.status  # awaiting-external
            self._accept(mv)
            return self.status
        raise InconsistentParams(f"cannot step from status {self.status}")

    def submit_move(self, ball: FormalBall):
        """External B entry point; returns (accepted, reason)."""
        if self.status not in ("awaiting-B", "awaiting-external"):
            return False, "OutOfTurn"
        ok, reason = self.validate_move(ball)
        self.last_rejection = reason
        if ok:
            self._accept(ball)
        return ok, reason

    def _accept(self, ball: FormalBall) -> None:
        self.k += 1
        self.ball = ball
        self.moves.append(Move(k=self.k - 1, role="B", ball=ball))
        self.plan = None
        self.classic_a_ball = None
        self.status = "awaiting-A"

    def run(self, rounds: int) -> Transcript:
        if rounds > self.params.max_rounds:
            raise InconsistentParams(f"rounds > max_rounds = {self.params.max_rounds}")
        while self.k <= rounds and self.status != "finished":
            before = self.status
            self.step()
            if self.status == "awaiting-external":
                raise BStalled("external player cannot be driven by run()")
            if self.status == before and before != "awaiting-A":
                raise BStalled("no progress")
        self.status = "finished"
        return self.snapshot()

    def snapshot(self) -> Transcript:
        moves = list(self.moves)
        if moves and moves[-1].role == "A":
            moves.pop()  # a pending plan is state, not history
        return Transcript(
            instance_id=self.instance.id,
            params=self.params,
            witness=self.instance.witness,
            m_star=self.m_star,
            moves=tuple(moves),
            deepest=self.ball,
            constant=self.constant(),
        )


def _nearest_member(ms, ball: FormalBall):
    if ms[0].word is not None:
        pref = ball.center.word
        def score(m):
            w = m.word.prefix(len(pref))
            agree = 0
            for a, b in zip(w, pref):
                if a != b:
                    break
                agree += 1
            return (-agree, w)
        return sorted(ms, key=score)[0]
    c = ball.center.coords
    def dist(m):
        return max(abs(x - y) for x, y in zip(m.point, c))
    return sorted(ms, key=lambda m: (dist(m), m.point))[0]


def _hyperplane_through(inst, ms, ball):
    from .families import Member, simplex_hyperplane
    region = psi_eval(inst.spec, FormalBall(ball.center, ball.t + inst.lc_depth))
    try:
        res = simplex_hyperplane(region, k=inst.family.relevant_index(ball.t) or 2,
                                 n=inst.spec.dim, family=inst.family)
    except Exception:
        res = None
    if res is None:
        return _nearest_member(ms, ball)
    normal, offset = res
    from .families import HyperplanePiece
    c = ball.center.coords
    hw = tuple(inst.spec.radius(i, ball.t) for i in range(inst.spec.dim))
    piece = HyperplanePiece(normal=normal, offset=offset, center=tuple(c),
                            halfwidths=hw)
    return Member(size=LogVal(0), piece=piece)


def _piece_anchor(piece):
    from .geometry import Box, Slab
    if isinstance(piece, Box):
        hull = piece.rational_hull(64)
        return tuple((lo + hi) / 2 for lo, hi in hull)
    if isinstance(piece, Slab) and piece.bbox is not None:
        hull = piece.bbox.rational_hull(64)
        return tuple((lo + hi) / 2 for lo, hi in hull)
    return None


def _snap_cantor(x: Fraction, t: Fraction, inst) -> Fraction:
    """Left endpoint of the depth-d cell nearest x, walking down the tree."""
    width = inst.spec.radius(0, t).upper_rational()
    depth = 1
    w = Fraction(1, 3)
    while w > width and depth < 200:
        w /= 3
        depth += 1
    a, b = Fraction(0), Fraction(1)
    for _ in range(depth):
        third = (b - a) / 3
        if x <= (a + b) / 2:
            b = a + third
        else:
            a = b - third
    return a


# --------------------------------------------------------------------------
# Public constructors
# --------------------------------------------------------------------------

def default_opening(instance: Instance, params: GameParams,
                    rng: random.Random) -> FormalBall:
    t1 = params.t1
    if t1 is None:
        t1 = rational_lower(instance.min_size(), 100) + params.b
    if instance.spec.kind == "shift":
        word = tuple(rng.randrange(instance.spec.alphabet)
                     for _ in range(max(int(t1), 0) + instance.opening_word_len))
        return FormalBall(Point.of_word(word), Fraction(int(t1)))
    coords = []
    for lo, hi in instance.opening_box:
        coords.append(lo + (hi - lo) * Fraction(rng.randrange(0, 257), 256))
    if instance.support.kind == "cantor":
        coords = [_snap_cantor(coords[0], t1, instance)]
    return FormalBall(Point.euclidean(*coords), t1)


def compute_m_star(instance: Instance, params: GameParams, t1: Fraction) -> int:
    s1 = instance.min_size()
    m = 1
    while LogVal(t1 - m * params.b).cmp(s1) > 0:
        m += 1
        if m > 64:
            raise InconsistentParams("m* blew up; raise b or lower t1")
    return m


def new_game(instance: Instance, params: GameParams,
             b_strategy: Optional[BStrategy] = None) -> GameState:
    """Validated initial state: B's opening ball is already on the record."""
    params.check(instance.witness)
    bs = b_strategy or BStrategy.random()
    rng = random.Random(params.seed ^ 0x5EED)
    if bs.kind == "scripted":
        opening = bs.next_scripted()
    else:
        opening = default_opening(instance, params, rng)
    if not instance.support.contains_point(opening.center):
        raise IllegalMove("CenterOutsideSupport", "opening ball outside X")
    instance.spec.check_height(opening.t)
    if instance.spec.kind == "shift" and len(opening.center.word) < int(opening.t):
        raise IllegalMove("Malformed", "opening word shorter than its depth")
    m_star = compute_m_star(instance, params, opening.t)
    return GameState(instance, params, bs, opening, m_star)
