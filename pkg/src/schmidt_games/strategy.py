"""Player A: diffuseness witnesses, avoidance balls, and strategy steps.

The witness constants are the content of the theorems; they are derived by
the constructions below (separation, uniform perfectness, measure decay,
composition, transport) and stored as exact rationals obtained by outward
rounding, so every inequality they promise still holds.

Strategy steps emit AvoidancePlans whose soundness is provable by the
geometry predicates: the witness ball is contained in the current ball and
disjoint from the deletion neighborhood, both certified.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .errors import (
    ConditionTwoSixUnavailable,
    DecayTooWeak,
    IndeterminatePredicate,
    LStarCertificateFails,
    NoAvoidingBall,
    NStarNotOne,
    WitnessMismatch,
)
from .exactnum import Exact, LogVal, Rat, _as_fraction, rational_lower, rational_upper
from .families import Family, Member, member_neighborhood, members_up_to, window_members
from .geometry import (
    AmbientSupport,
    Box,
    Cylinder,
    FormalBall,
    Piece,
    Point,
    PsiSpec,
    Slab,
    Tri,
    cantor_cells,
    contains,
    disjoint_from_all,
    psi_eval,
)

GRID_BUDGET = 40_000


# --------------------------------------------------------------------------
# Witnesses and measures
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class DiffusenessWitness:
    """Constants certifying the strong or graded diffuseness condition."""

    strength: str                    # "strong" | "graded"
    b_star: Fraction
    n_star: int = 1
    L_star: Fraction = Fraction(0)
    escape_depth: Dict[Fraction, int] = field(default_factory=dict)
    provenance: str = "declared"

    def escape(self, b: Rat) -> int:
        """n(b): extra deletion depth factor; 1 for every derivation here."""
        return self.escape_depth.get(_as_fraction(b), 1)

    def as_json(self) -> dict:
        return {
            "strength": self.strength,
            "b_star": _frac_str(self.b_star),
            "n_star": self.n_star,
            "L_star": _frac_str(self.L_star),
            "escape_depth_table": {_frac_str(k): v for k, v in self.escape_depth.items()},
            "provenance": self.provenance,
        }


@dataclass(frozen=True)
class SDiffuse:
    """Diffuseness against a simple obstacle collection (points/hyperplanes)."""

    b_star: Fraction
    collection: str  # "points" | "hyperplanes"
    provenance: str = "declared"


@dataclass(frozen=True)
class DecaySpec:
    """(delta, c_delta) decay against a collection, condition-style."""

    delta: Fraction
    c_delta: Fraction
    collection: str  # "points" | "hyperplanes"


@dataclass(frozen=True)
class FamilyDecay:
    """f(b, s) = phi(b) * c_delta * e^(-delta s) against a resonant family."""

    phi_kind: str        # "lacunary" | "exp" | "const"
    phi_param: Fraction  # lambda, delta-bar, or the constant
    delta: Fraction
    c_delta: Fraction


@dataclass(frozen=True)
class PowerLaw:
    """c1 e^(-tau t) <= mu(psi(x,t)) <= c2 e^(-tau t).

    tau_kind: "rational" (tau itself), "log" (tau = log tau_param), or
    "logratio" (tau = log a / log b with tau_param = (a, b)).
    """

    tau_kind: str
    tau_param: Union[Fraction, int, Tuple[int, int]]
    c1: Fraction
    c2: Fraction


@dataclass(frozen=True)
class MeasureSpec:
    """Measure data used by decay audits and the dimension estimator."""

    kind: str  # "lebesgue" | "cantor" | "shift_uniform" | "product"
    support: AmbientSupport
    decay: Optional[DecaySpec] = None
    family_decay: Optional[FamilyDecay] = None
    power_law: Optional[PowerLaw] = None
    c0: Fraction = Fraction(1, 2)
    d_star: Optional[Fraction] = None
    federer_K: Optional[Fraction] = None  # recorded only; no Federer route
    factors: Optional[Tuple["MeasureSpec", ...]] = None


def _frac_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


# --------------------------------------------------------------------------
# Avoidance plans
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class AvoidancePlan:
    round_index: int
    obstacle: Tuple[Piece, ...]
    obstacle_kind: str
    obstacle_count: int
    deletion_height: Fraction
    witness_ball: FormalBall
    window_lo: Fraction
    window_hi: Fraction
    family_slot: int = 0  # which family this round targets (interleaving)


def plan_is_sound(spec: PsiSpec, parent: FormalBall, plan: AvoidancePlan) -> bool:
    """Re-derive the plan invariant with the geometry predicates."""
    region = psi_eval(spec, plan.witness_ball)
    if contains(psi_eval(spec, parent), region) is not Tri.YES:
        return False
    return disjoint_from_all(region, plan.obstacle) is Tri.YES


# --------------------------------------------------------------------------
# find_avoiding_ball
# --------------------------------------------------------------------------

def find_avoiding_ball(support: AmbientSupport, spec: PsiSpec, ball: FormalBall,
                       obstacle: Sequence[Piece], target_t: Rat) -> FormalBall:
    """Deterministic witness ball inside psi(ball), clear of the obstacle.

    Shift supports extend the cylinder symbol by symbol; Euclidean supports
    scan an axis-aligned grid of sub-centers (step = half the target radius)
    in lexicographic order, with a closed-form offset tried first when the
    obstacle is a single slab.  The returned ball is always re-certified by
    the predicates.
    """
    target_t = _as_fraction(target_t)
    if target_t < ball.t:
        raise ValueError("target height below current height")
    if spec.kind == "shift":
        return _avoid_shift(support, spec, ball, obstacle, int(target_t))
    return _avoid_euclidean(support, spec, ball, obstacle, target_t)


def _avoid_shift(support, spec, ball, obstacle, target_t) -> FormalBall:
    depth = int(ball.t)
    word = ball.center.word[:depth]
    ext = target_t - depth
    if spec.alphabet ** ext > GRID_BUDGET:
        raise NoAvoidingBall("cylinder extension too deep to enumerate")
    for cand in _words_lex(spec.alphabet, ext):
        w = word + cand
        cyl = Cylinder(w, spec.alphabet)
        if disjoint_from_all(cyl, tuple(obstacle)) is Tri.YES:
            return FormalBall(Point.of_word(w), Fraction(target_t))
    raise NoAvoidingBall(f"no depth-{target_t} cylinder avoids the obstacle")


def _words_lex(alphabet: int, length: int):
    if length == 0:
        yield ()
        return
    for s in range(alphabet):
        for rest in _words_lex(alphabet, length - 1):
            yield (s,) + rest


def _adaptive_bits(x: Fraction, extra: int = 20) -> int:
    """Enough dyadic bits to resolve x with `extra` guard bits."""
    if x <= 0:
        return 24
    expo = x.denominator.bit_length() - x.numerator.bit_length()
    return max(24, expo + extra)


def _dyadic_floor(x: Fraction, bits: Optional[int] = None) -> Fraction:
    bits = _adaptive_bits(x) if bits is None else bits
    return Fraction((x * 2 ** bits).__floor__(), 2 ** bits)


def _dyadic_ceil(x: Fraction, bits: Optional[int] = None) -> Fraction:
    bits = _adaptive_bits(x) if bits is None else bits
    return Fraction((x * 2 ** bits).__ceil__(), 2 ** bits)


def _avoid_euclidean(support, spec, ball, obstacle, target_t) -> FormalBall:
    n = spec.dim
    center = ball.center.coords
    # certified rational slack: how far the sub-center may move per axis
    slack: List[Fraction] = []
    rad_hi: List[Fraction] = []
    for i in range(n):
        shrink = spec.radius(i, ball.t) - spec.radius(i, target_t)
        slack.append(_dyadic_floor(shrink.lower_rational()))
        rad_hi.append(_dyadic_ceil(spec.radius(i, target_t).upper_rational()))
    if any(s <= 0 for s in slack):
        raise NoAvoidingBall("target height leaves no room to move")

    # the recentered ball first (always answers an empty obstacle), then a
    # closed-form slab offset, then the lexicographic grid
    got = _try_candidate(support, spec, ball, tuple(center), target_t, obstacle)
    if got is not None:
        return got
    candidates = _closed_form_slab_candidates(support, spec, ball, obstacle,
                                              target_t, slack, rad_hi)
    for cand in candidates:
        got = _try_candidate(support, spec, ball, cand, target_t, obstacle)
        if got is not None:
            return got

    for cand in _grid_candidates(support, spec, center, slack, rad_hi, target_t):
        got = _try_candidate(support, spec, ball, cand, target_t, obstacle)
        if got is not None:
            return got
    raise NoAvoidingBall(
        f"grid search exhausted at height {target_t} against {len(obstacle)} pieces")


def _try_candidate(support, spec, ball, coords, target_t, obstacle) -> Optional[FormalBall]:
    pt = Point(coords=tuple(coords))
    if not support.contains_point(pt):
        return None
    cand = FormalBall(pt, target_t)
    try:
        region = psi_eval(spec, cand)
        if contains(psi_eval(spec, ball), region) is not Tri.YES:
            return None
        if obstacle and disjoint_from_all(region, tuple(obstacle)) is not Tri.YES:
            return None
    except IndeterminatePredicate:
        return None
    return cand


def _closed_form_slab_candidates(support, spec, ball, obstacle, target_t,
                                 slack, rad_hi):
    """Offset along the slab normal, tried before the grid (full spaces only)."""
    if support.kind != "euclidean":
        return []
    slabs = [p for p in obstacle if isinstance(p, Slab)]
    boxes = [p for p in obstacle if isinstance(p, Box)]
    piece: Optional[Tuple[Tuple[Fraction, ...], Fraction, Fraction]] = None
    if len(slabs) == 1 and not boxes:
        s = slabs[0]
        piece = (s.normal, s.offset,
                 _dyadic_ceil((Exact.of(0) + s.halfwidth).upper_rational()))
    elif len(boxes) == 1 and not slabs and spec.dim == 1:
        (lo, hi), = boxes[0].axes
        mid = (lo + hi) * Fraction(1, 2)
        halfw = (hi - lo) * Fraction(1, 2)
        piece = ((Fraction(1),), _dyadic_ceil(mid.upper_rational()),
                 _dyadic_ceil(halfw.upper_rational()))
    if piece is None:
        return []
    normal, offset, width = piece
    center = ball.center.coords
    proj_c = sum(a * c for a, c in zip(normal, center))
    rad_a = sum(abs(a) * r for a, r in zip(normal, rad_hi))
    norm2 = sum(a * a for a in normal)
    out = []
    for side in (1, -1):
        # place the candidate so its projection clears the slab by half a radius
        target_proj = offset + side * (width + rad_a + Fraction(rad_a, 2))
        mu = (target_proj - proj_c) / norm2
        cand = tuple(c + mu * a for c, a in zip(center, normal))
        out.append(cand)
    return out


def _grid_candidates(support, spec, center, slack, rad_hi, target_t):
    n = len(center)
    if support.kind == "cantor":
        yield from _cantor_candidates(center, slack, rad_hi, target_t)
        return
    steps = [max(r / 2, Fraction(1, 10**12)) for r in rad_hi]
    counts = [min(int(s / st) + 1, 401) for s, st in zip(slack, steps)]
    total = 1
    for c in counts:
        total *= 2 * c + 1
    if total > GRID_BUDGET:
        # coarsen: widen the step so the grid fits the budget
        scale = (total / GRID_BUDGET) ** (1.0 / n)
        steps = [st * Fraction(int(scale * 16) + 16, 16) for st in steps]
        counts = [min(int(s / st) + 1, 401) for s, st in zip(slack, steps)]

    def rec(axis, acc):
        if axis == n:
            yield tuple(acc)
            return
        for j in range(-counts[axis], counts[axis] + 1):
            off = j * steps[axis]
            if abs(off) > slack[axis]:
                continue
            yield from rec(axis + 1, acc + [center[axis] + off])

    yield from rec(0, [])


def _cantor_candidates(center, slack, rad_hi, target_t):
    lo = center[0] - slack[0]
    hi = center[0] + slack[0]
    # cells no wider than the target radius so a cell endpoint can anchor a ball
    depth = 1
    width = Fraction(1, 3)
    while width > rad_hi[0] and depth < 200:
        width /= 3
        depth += 1
    for extra in (0, 1, 2):
        seen = []
        for a, b in cantor_cells(max(lo, Fraction(0)), min(hi, Fraction(1)), depth + extra):
            for endpoint in (a, b):
                if lo <= endpoint <= hi and endpoint not in seen:
                    seen.append(endpoint)
        yield from ((e,) for e in seen)


# --------------------------------------------------------------------------
# Strategy steps
# --------------------------------------------------------------------------

def _zone_region(spec: PsiSpec, ball: FormalBall):
    """Query region wide enough to catch every member whose deletion
    neighborhood can reach psi(ball): inflate by one extra radius."""
    if spec.kind == "shift":
        return psi_eval(spec, ball)
    hull = []
    for i, c in enumerate(ball.center.coords):
        r = spec.radius(i, ball.t).upper_rational()
        hull.append((c - 2 * r, c + 2 * r))
    return tuple(hull)


def weak_strategy_step(support: AmbientSupport, spec: PsiSpec, family: Family,
                       witness: DiffusenessWitness, ball: FormalBall, b: Rat,
                       m_star: int, round_index: int,
                       window_width: Optional[int] = None,
                       slot: int = 0,
                       escape_override: Optional[int] = None) -> AvoidancePlan:
    """One step of the graded strategy: delete the fresh size window.

    window_width scales the enumeration window (n* b-tilde for interleaved
    play); escape_override supplies the summed escape depth in that case.
    """
    b = _as_fraction(b)
    btilde = m_star * b
    l_star = escape_override if escape_override is not None else witness.escape(btilde)
    t_k = ball.t
    deletion_height = t_k + l_star * btilde
    width = (window_width or 1) * btilde
    ms = window_members(family, _zone_wrap(spec, ball), t_k, width)
    pieces = tuple(member_neighborhood(spec, m, deletion_height) for m in ms)
    target = t_k + btilde
    wball = find_avoiding_ball(support, spec, ball, pieces, target)
    return AvoidancePlan(
        round_index=round_index,
        obstacle=pieces,
        obstacle_kind=_kind_of(ms),
        obstacle_count=len(pieces),
        deletion_height=deletion_height,
        witness_ball=wball,
        window_lo=witness.b_star,
        window_hi=btilde,
        family_slot=slot,
    )


def strong_strategy_step(support: AmbientSupport, spec: PsiSpec, family: Family,
                         witness: DiffusenessWitness, ball: FormalBall, b: Rat,
                         round_index: int) -> AvoidancePlan:
    """One step of the strong strategy: delete the full relevant set."""
    if witness.strength != "strong":
        raise WitnessMismatch("strong strategy needs a strong witness")
    b = _as_fraction(b)
    l_star = witness.escape(witness.b_star)
    t_k = ball.t
    deletion_height = t_k + l_star * witness.b_star
    ms = members_up_to(family, _zone_wrap(spec, ball), t_k)
    pieces = tuple(member_neighborhood(spec, m, deletion_height) for m in ms)
    target = t_k + witness.b_star
    wball = find_avoiding_ball(support, spec, ball, pieces, target)
    return AvoidancePlan(
        round_index=round_index,
        obstacle=pieces,
        obstacle_kind=_kind_of(ms),
        obstacle_count=len(pieces),
        deletion_height=deletion_height,
        witness_ball=wball,
        window_lo=witness.b_star,
        window_hi=b,
    )


def _zone_wrap(spec, ball):
    if spec.kind == "shift":
        return psi_eval(spec, ball)
    return _zone_region(spec, ball)


def _kind_of(ms: Sequence[Member]) -> str:
    if not ms:
        return "empty"
    if ms[0].point is not None:
        return "points"
    if ms[0].word is not None:
        return "cylinders"
    return "slabs"


# --------------------------------------------------------------------------
# Witness derivations
# --------------------------------------------------------------------------

def uniformly_perfect_to_diffuse(nu: Union[LogVal, Rat]) -> LogVal:
    """Point-diffuseness exponent of a uniformly perfect space:
    beta = nu + log 4 + log(4/3)."""
    nu = nu if isinstance(nu, LogVal) else LogVal(_as_fraction(nu))
    return nu + LogVal.log(4) + LogVal.log(4) - LogVal.log(3)


def compose_diffuseness(s_diffuse: SDiffuse, d_star: Rat, l_star: Rat,
                        n_star: int = 1) -> DiffusenessWitness:
    """Strong family witness from obstacle-collection diffuseness plus a
    separating constant and a local-containment depth: b = l* + d* + b*."""
    if n_star != 1:
        raise NStarNotOne("composition requires local containment with n* = 1")
    b_bar = _as_fraction(l_star) + _as_fraction(d_star) + s_diffuse.b_star
    return DiffusenessWitness(
        strength="strong", b_star=b_bar,
        provenance=f"compose({s_diffuse.provenance}, d*={d_star}, l*={l_star})")


def separation_to_witness(cbar: Rat, beta: Union[LogVal, Rat], d_star: Rat,
                          grain: int = 100) -> DiffusenessWitness:
    """Strong witness for point families with pairwise separation cbar:
    local containment depth l* = log 2 - log cbar."""
    l_star_val = LogVal.log(2) - (LogVal.log(_as_fraction(cbar)))
    l_star = max(Fraction(0), rational_upper(l_star_val, grain))
    beta_r = rational_upper(beta, grain) if isinstance(beta, LogVal) else _as_fraction(beta)
    sd = SDiffuse(b_star=beta_r, collection="points", provenance="point_diffuse")
    w = compose_diffuseness(sd, _as_fraction(d_star), l_star)
    return DiffusenessWitness(strength="strong", b_star=w.b_star,
                              provenance=f"separation(cbar={cbar})")


def decay_to_diffuse(measure: MeasureSpec, d_star: Rat,
                     n_star: int = 1, L_star: Rat = Fraction(0),
                     cap: int = 128) -> Union[SDiffuse, DiffusenessWitness]:
    """Diffuseness from measure decay.

    With plain collection decay:  b* > log(c_delta)/delta + 2 d*  gives
    diffuseness against the collection (to be composed).  With family decay
    f(b,s) = phi(b) c e^(-delta s), solve the contraction inequality
    f(n*(b + L*) + d*, b - 2d*) <= c0 < 1 for all b past a certified
    threshold and return the graded witness b* + 2d*.
    """
    d_star = _as_fraction(d_star)
    L_star = _as_fraction(L_star)
    if measure.family_decay is None:
        if measure.decay is None:
            raise ValueError("measure carries no decay data")
        dec = measure.decay
        base = LogVal.log(dec.c_delta.numerator) - LogVal.log(dec.c_delta.denominator)
        b_star = rational_upper(base.scale(1 / dec.delta) + 2 * d_star, 100) \
            + Fraction(1, 100)
        return SDiffuse(b_star=b_star, collection=dec.collection,
                        provenance=f"decay(delta={dec.delta},c={dec.c_delta})")
    fd = measure.family_decay
    c0 = measure.c0
    if fd.phi_kind == "exp" and fd.phi_param >= fd.delta:
        raise DecayTooWeak("phi grows at least as fast as the decay")
    b = Fraction(1)
    while b <= cap:
        if _contraction_certified(fd, b, d_star, n_star, L_star, c0):
            b_star = b
            witness = DiffusenessWitness(
                strength="graded", b_star=b_star + 2 * d_star,
                n_star=n_star, L_star=L_star,
                provenance=f"family_decay(phi={fd.phi_kind}:{fd.phi_param},"
                           f"delta={fd.delta})")
            return witness
        b += Fraction(1, 2)
    raise DecayTooWeak(f"no b below {cap} satisfies the contraction inequality")


def _contraction_certified(fd: FamilyDecay, b: Fraction, d_star: Fraction,
                           n_star: int, L_star: Fraction, c0: Fraction) -> bool:
    """Certified:  phi(n*(b+L*) + d*) * c_delta * e^(-delta (b - 2d*)) <= c0
    for THIS b and all larger b (monotone decrease certified as well)."""
    B = n_star * (b + L_star) + d_star
    s = b - 2 * d_star
    if s <= 0:
        return False
    decay_hi = Exact.exp(LogVal(-fd.delta * s))
    if fd.phi_kind == "const":
        val = decay_hi * (fd.phi_param * fd.c_delta)
        return val.cmp(Exact.of(c0)) <= 0  # constant phi: decreasing in b
    if fd.phi_kind == "exp":
        # phi = e^(dbar * B): value and monotonicity both exact
        val = Exact.exp(LogVal(fd.phi_param * B - fd.delta * s)) * fd.c_delta
        return fd.phi_param * n_star < fd.delta and val.cmp(Exact.of(c0)) <= 0
    if fd.phi_kind == "lacunary":
        # phi(B) = B / log(lambda) + 1, bounded above via a lower log bound
        lam = fd.phi_param
        log_lo = (LogVal.log(lam.numerator) - LogVal.log(lam.denominator)).bounds(128)[0]
        if log_lo <= 0:
            raise DecayTooWeak("lacunarity constant must exceed 1")
        phi_hi = B / log_lo + 1
        val = decay_hi * (phi_hi * fd.c_delta)
        if not val.cmp(Exact.of(c0)) <= 0:
            return False
        # decreasing beyond b iff n*/log(lam) <= delta * phi(B), certified via
        # phi(B) >= B/log_hi + 1 >= n*/ (delta log_lo) once B is large enough
        return n_star / log_lo <= fd.delta * (B / log_lo + 1) and fd.delta * 1 > 0
    raise ValueError(f"unknown phi kind {fd.phi_kind!r}")


def bridged_family_decay(dec: DecaySpec, n_star: int, l_star: Rat,
                         d_star: Rat) -> FamilyDecay:
    """Collection decay + local containment  =>  family decay with
    f_inf(s) = n* c_delta e^(-delta s) (sizes shifted by l* + d*)."""
    return FamilyDecay(phi_kind="const", phi_param=Fraction(n_star),
                       delta=dec.delta, c_delta=dec.c_delta)


# --------------------------------------------------------------------------
# Transport along bi-Lipschitz-like maps
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class AffineMap:
    """x -> M x + v with exact rational entries, M invertible."""

    linear: Tuple[Tuple[Fraction, ...], ...]
    shift: Tuple[Fraction, ...]

    def __post_init__(self):
        inv = _mat_inverse(self.linear)
        object.__setattr__(self, "_inv", inv)

    @property
    def dim(self):
        return len(self.shift)

    def apply(self, x: Sequence[Fraction]) -> Tuple[Fraction, ...]:
        return tuple(sum(r[j] * x[j] for j in range(self.dim)) + s
                     for r, s in zip(self.linear, self.shift))

    def apply_inverse(self, y: Sequence[Fraction]) -> Tuple[Fraction, ...]:
        d = tuple(c - s for c, s in zip(y, self.shift))
        return tuple(sum(r[j] * d[j] for j in range(self.dim)) for r in self._inv)

    def inf_norms(self) -> Tuple[Fraction, Fraction]:
        fwd = max(sum(abs(x) for x in row) for row in self.linear)
        bwd = max(sum(abs(x) for x in row) for row in self._inv)
        return fwd, bwd


def _mat_inverse(m):
    n = len(m)
    a = [list(row) + [Fraction(1) if i == j else Fraction(0) for j in range(n)]
         for i, row in enumerate(m)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            raise ValueError("transport map must be invertible")
        a[col], a[piv] = a[piv], a[col]
        f = a[col][col]
        a[col] = [x / f for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                g = a[r][col]
                a[r] = [x - g * y for x, y in zip(a[r], a[col])]
    return tuple(tuple(row[n:]) for row in a)


def lipschitz_exponent(mapping: AffineMap, grain: int = 100) -> Fraction:
    """Certified L*: the sandwich holds with L* = log max(|M|, |M^-1|, 1)."""
    fwd, bwd = mapping.inf_norms()
    worst = max(fwd, bwd, Fraction(1))
    return rational_upper(LogVal.log(worst.numerator) - LogVal.log(worst.denominator),
                          grain)


def validate_sandwich(mapping: AffineMap, spec: PsiSpec, L_star: Fraction,
                      samples: Sequence[FormalBall]) -> None:
    """Check  psi(Fx, r+2L*)  subset  F(psi(x, r+L*))  subset  psi(Fx, r)
    on sampled balls, exactly; raises with the offending ball."""
    if spec.kind != "standard":
        raise ValueError("transport sandwich is validated for standard specs")
    n = spec.dim
    for ball in samples:
        x = ball.center.coords
        r = ball.t
        fx = mapping.apply(x)
        inner = psi_eval(spec, FormalBall(Point(coords=fx), r + 2 * L_star))
        outer = psi_eval(spec, FormalBall(Point(coords=fx), r))
        mid_rad = [spec.radius(i, r + L_star) for i in range(n)]
        # F(box) contains inner iff all vertices of F^-1(inner) are in the box
        if not _vertices_inside_after(mapping.apply_inverse, inner, x, mid_rad):
            raise LStarCertificateFails(ball, "inner inclusion fails")
        # F(box) inside outer iff all vertices of F(box) are in outer
        if not _image_vertices_inside(mapping, x, mid_rad, outer):
            raise LStarCertificateFails(ball, "outer inclusion fails")


def _vertices_inside_after(inv_apply, region: Box, center, rads) -> bool:
    n = len(center)
    rat_axes = region.rational_hull()
    for idx in range(2 ** n):
        v = tuple(rat_axes[i][1] if (idx >> i) & 1 else rat_axes[i][0]
                  for i in range(n))
        w = inv_apply(v)
        for i in range(n):
            delta = Exact.of(abs(w[i] - center[i]))
            if delta.cmp(rads[i]) > 0:
                return False
    return True


def _image_vertices_inside(mapping: AffineMap, center, rads, outer: Box) -> bool:
    n = len(center)
    for idx in range(2 ** n):
        signs = [1 if (idx >> i) & 1 else -1 for i in range(n)]
        img_c = mapping.apply(center)
        offset = [Exact.zero() for _ in range(n)]
        for j in range(n):
            for i in range(n):
                offset[i] = offset[i] + rads[j] * (mapping.linear[i][j] * signs[j])
        for i in range(n):
            v = Exact.of(img_c[i]) + offset[i]
            lo, hi = outer.axes[i]
            if v.cmp(lo) < 0 or v.cmp(hi) > 0:
                return False
    return True


def transport_family(mapping: AffineMap, family, witness: DiffusenessWitness,
                     spec: PsiSpec, sample_balls: Sequence[FormalBall] = ()):
    """Image family (members mapped, sizes dropped by L*) and its witness."""
    L = lipschitz_exponent(mapping)
    if sample_balls:
        validate_sandwich(mapping, spec, L, sample_balls)
    new_witness = DiffusenessWitness(
        strength=witness.strength,
        b_star=witness.b_star + 2 * L,
        n_star=witness.n_star,
        L_star=Fraction(0),
        provenance=f"transport(L*={L}) of {witness.provenance}",
    )
    return TransportedFamily(mapping, family, L), new_witness


class TransportedFamily:
    """Members are images under the map; sizes drop by the Lipschitz bound."""

    kind = "transported"

    def __init__(self, mapping: AffineMap, base, L_star: Fraction):
        self.mapping = mapping
        self.base = base
        self.L_star = L_star
        self.min_index = base.min_index

    def size_of(self, i: int) -> LogVal:
        return self.base.size_of(i) - self.L_star

    def relevant_index(self, t):
        from .families import _as_logval
        return self.base.relevant_index(_as_logval(t) + self.L_star)

    def members(self, hull, hi_size, lo_size=None, budget=None):
        from .families import _as_logval
        pre_hull = _preimage_hull(self.mapping, hull)
        hi = _as_logval(hi_size) + self.L_star
        lo = _as_logval(lo_size) + self.L_star if lo_size is not None else None
        out = []
        for m in self.base.members(pre_hull, hi, lo_size=lo, budget=budget):
            if m.point is None:
                raise ValueError("transport supports point families")
            out.append(Member(size=m.size - self.L_star,
                              point=self.mapping.apply(m.point)))
        return out


def _preimage_hull(mapping: AffineMap, hull):
    n = len(hull)
    corners = []
    for idx in range(2 ** n):
        v = tuple(hull[i][1] if (idx >> i) & 1 else hull[i][0] for i in range(n))
        corners.append(mapping.apply_inverse(v))
    return tuple((min(c[i] for c in corners), max(c[i] for c in corners))
                 for i in range(n))


# --------------------------------------------------------------------------
# Interleaving, constants, classic reduction
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class InterleavedStrategy:
    families: Tuple[Family, ...]
    witnesses: Tuple[DiffusenessWitness, ...]

    def __post_init__(self):
        n = len(self.families)
        if len(self.witnesses) != n:
            raise WitnessMismatch("one witness per family")
        b0 = self.witnesses[0].b_star
        for w in self.witnesses:
            if w.strength != "graded" and w.strength != "strong":
                raise WitnessMismatch("witnesses must be graded")
            if w.b_star != b0:
                raise WitnessMismatch("witnesses disagree on b*")

    @property
    def n_star(self) -> int:
        return len(self.families)

    @property
    def b_star(self) -> Fraction:
        return self.witnesses[0].b_star

    def slot_of(self, round_index: int) -> int:
        return (round_index - 1) % self.n_star

    def escape_sum(self, btilde: Fraction) -> int:
        return sum(w.escape(btilde) for w in self.witnesses)


def winning_constant(l_star: Rat, m_star: int, b: Rat) -> Fraction:
    """Approximation constant certified for the outcome: (l*+1) m* b."""
    return (_as_fraction(l_star) + 1) * m_star * _as_fraction(b)


def require_strong_for_classic(witness: DiffusenessWitness) -> None:
    if witness.strength != "strong":
        raise ConditionTwoSixUnavailable(
            "classic reduction needs the strong condition; witness is graded")
