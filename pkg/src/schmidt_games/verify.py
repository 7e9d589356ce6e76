"""Independent oracles and certificates for game outcomes.

Nothing here trusts the strategy: badness certificates re-enumerate the
family near the outcome and re-run the disjointness predicates; the
continued-fraction oracle rederives approximation quality from the
outcome interval alone; the measure audits recompute masses exactly.
"""

from __future__ import annotations

import hashlib
import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

from .engine import BStrategy, GameParams, Instance, Transcript, new_game
from .errors import (
    AuditFailure,
    BStalled,
    ChildCountCollapse,
    IllegalMove,
    InconsistentParams,
    IntervalTooWide,
    PowerLawViolation,
    PrefixTooShort,
)
from .exactnum import Exact, LogVal, Rat, _as_fraction
from .families import (
    Family,
    ToralFamily,
    ceil_logval,
    floor_exp,
    member_neighborhood,
    members_up_to,
)
from .geometry import (
    Box,
    Cylinder,
    FormalBall,
    ObstacleDescriptor,
    Point,
    PsiSpec,
    Region,
    Slab,
    Tri,
    cantor_cells,
    contains,
    disjoint,
    psi_eval,
)
from .measures import (
    box_volume,
    cantor_interval_mass,
    cylinder_mass,
    power_law_envelope_bounds,
    region_mass,
)
from .strategy import MeasureSpec, _dyadic_ceil, _dyadic_floor

SizeLike = Union[LogVal, Fraction, int]


# --------------------------------------------------------------------------
# Badness certificates
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class BadnessCertificate:
    family_id: str
    constant: Fraction
    horizon: LogVal
    method: str
    verdict: bool
    witnesses: Tuple[str, ...] = ()
    transcript_ref: Optional[str] = None

    @property
    def certificate_id(self) -> str:
        return hashlib.sha256(self.dumps().encode()).hexdigest()[:16]

    def to_json(self) -> dict:
        lo, hi = self.horizon.bounds(64)
        return {
            "transcript_ref": self.transcript_ref,
            "family_id": self.family_id,
            "c": f"{self.constant.numerator}/{self.constant.denominator}",
            "horizon": f"{float((lo + hi) / 2):.6f}",
            "verdict": "pass" if self.verdict else "fail",
            "witnesses": list(self.witnesses),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":")) + "\n"


def badness_certificate(outcome: Region, family: Family, spec: PsiSpec,
                        c: Rat, horizon: SizeLike,
                        transcript_ref: Optional[str] = None,
                        budget: Optional[int] = None) -> BadnessCertificate:
    """Exhaustive check: the outcome region misses the shrunk neighborhood
    of every member with minimal size below the horizon.

    For denominator families the enumeration runs per dyadic denominator
    block over a Stern-Brocot walk: a member with denominator q can only
    reach the outcome when |p/q - x| <= kappa/q^2, so padding the interval
    by kappa/4^j catches every candidate with q in [2^j, 2^(j+1)).
    """
    c = _as_fraction(c)
    horizon = horizon if isinstance(horizon, LogVal) else LogVal(_as_fraction(horizon))
    ms = _certificate_members(outcome, family, spec, c, horizon, budget)
    if ms is None:
        query = _inflated_query(outcome, family, spec, c)
        ms = members_up_to(family, query, horizon, budget=budget)
    bad: List[str] = []
    for m in ms:
        h = m.size + c
        if spec.kind == "shift":
            # check at floor(s + c): a shallower (larger) neighborhood, so
            # disjointness certifies the target claim
            r = h.is_rational()
            depth = int(r) if r is not None and r.denominator == 1 else \
                -ceil_logval(-h)
            piece = member_neighborhood(spec, m, depth)
        else:
            piece = member_neighborhood(spec, m, h)
        if disjoint(outcome, piece) is not Tri.YES:
            bad.append(_member_label(m))
    return BadnessCertificate(
        family_id=getattr(family, "kind", "family"),
        constant=c,
        horizon=horizon,
        method="exhaustive",
        verdict=not bad,
        witnesses=tuple(bad[:16]),
        transcript_ref=transcript_ref,
    )


def _certificate_members(outcome, family, spec, c: Fraction, horizon: LogVal,
                         budget):
    """Dyadic-block enumeration for the two denominator families; None when
    the generic path should run instead."""
    from .families import Member, fractions_in_interval

    if not isinstance(outcome, Box) or spec.dim != 1:
        return None
    (lo_e, hi_e), = outcome.axes
    lo = lo_e.lower_rational()
    hi = hi_e.upper_rational()
    if getattr(family, "kind", "") == "rational" and family.dim == 1:
        k_hi = family.relevant_index(horizon)
        if k_hi is None:
            return []
        q_hi = k_hi - 1
        a = spec.axis_exponents()[0]  # neighborhood radius e^-a(log(q+1)+c)
        pad_num = _dyadic_ceil(Exact.exp(LogVal(-a * c)).upper_rational())
        exp_base = a
    elif getattr(family, "kind", "") == "horoball" and family.farey:
        from .families import _isqrt_floor_exp
        k_hi = family.relevant_index(horizon)
        if k_hi is None:
            return []
        q_hi = _isqrt_floor_exp(k_hi)
        if spec.axis_exponents()[0] != 1:
            return None
        # radius e^-(k_min + log2 + c) <= e^-c / (4 q^2)
        pad_num = _dyadic_ceil((Exact.exp(LogVal(-c)) *
                                Fraction(1, 4)).upper_rational())
        exp_base = Fraction(2)
    else:
        return None
    if q_hi < 1:
        return []
    out = {}
    j = 0
    while 2 ** j <= q_hi:
        blk_hi = min(2 ** (j + 1) - 1, q_hi)
        pad = pad_num / Fraction(2 ** j) ** exp_base
        for f in fractions_in_interval(lo - pad, hi + pad, blk_hi,
                                       budget or 100_000):
            if f not in out and f.denominator <= q_hi:
                if family.kind == "rational":
                    size = family.member_min_size(f.denominator)
                else:
                    k_min = family._member_k(Fraction(1, 2 * f.denominator ** 2))
                    if k_min > k_hi:
                        continue
                    size = family.size_of(k_min)
                if size.cmp(horizon) <= 0:
                    out[f] = Member(size=size, point=(f,))
        j += 1
    return list(out.values())


def _member_label(m) -> str:
    if m.point is not None:
        return "(" + ",".join(f"{c.numerator}/{c.denominator}" for c in m.point) + ")"
    if m.word is not None:
        return "w:" + "".join(map(str, m.word.head)) + "|" + \
            "".join(map(str, m.word.period or ()))
    return f"piece@{m.piece.offset}"


def _inflated_query(outcome: Region, family: Family, spec: PsiSpec, c: Fraction):
    if isinstance(outcome, Cylinder):
        return outcome
    try:
        s_min = family.size_of(family.min_index)
    except (IndexError, ValueError):
        return outcome.rational_hull()  # family has no members at all
    hull = []
    for i, (lo, hi) in enumerate(outcome.axes):
        exps = spec.axis_exponents()
        pad = Exact.exp((s_min + c).scale(-exps[i])).upper_rational()
        hull.append((lo.lower_rational() - pad, hi.upper_rational() + pad))
    return tuple(hull)


def default_horizon(transcript: Transcript) -> LogVal:
    """t_final - c: beyond it the shrunk neighborhoods cannot reach the
    outcome ball (monotone window accounting)."""
    return LogVal(transcript.deepest.t - transcript.constant)


# --------------------------------------------------------------------------
# Continued fractions
# --------------------------------------------------------------------------

def cf_oracle(lo: Fraction, hi: Fraction, depth: int) -> dict:
    """Partial quotients shared by every point of [lo, hi] in (0,1).

    Walks the Gauss map on interval endpoints with exact rationals.  Stops
    early (reporting blow_up) when a rational endpoint hits 0; raises
    IntervalTooWide when the interval cannot pin `depth` quotients.
    """
    lo, hi = _as_fraction(lo), _as_fraction(hi)
    if not (0 < lo <= hi < 1):
        raise ValueError("interval must sit inside (0, 1)")
    quotients: List[int] = []
    blow_up = False
    while len(quotients) < depth:
        if lo == hi:
            blow_up = True  # a point: rational, quotients terminate
            break
        inv_lo, inv_hi = 1 / hi, 1 / lo
        a_min = inv_lo.numerator // inv_lo.denominator
        a_max = inv_hi.numerator // inv_hi.denominator
        if inv_hi == a_max and a_max == a_min + 1:
            a_max = a_min  # upper endpoint exactly integer: cell boundary
        if a_min != a_max:
            break
        quotients.append(a_min)
        lo, hi = inv_lo - a_min, inv_hi - a_min
        if lo <= 0:
            blow_up = True  # rational endpoint reached: quotient explosion
            break
    if len(quotients) < depth and not blow_up:
        raise IntervalTooWide(
            f"only {len(quotients)} quotients determined, wanted {depth}")
    return {
        "quotients": quotients,
        "max_quotient": max(quotients) if quotients else None,
        "blow_up": blow_up,
    }


def cf_bound_from_constant(c: Rat, offset_kind: str = "plain") -> int:
    """Quotient bound implied by the certificate: badness at constant c for
    the denominator family means |x - p/q| >= kappa / q^2 with
    kappa = e^(-2c)/4 (plain sizes) or e^(-2c)/(4 (n! 2^n)^2) = e^(-2c)/16,
    and partial quotients never exceed 1/kappa."""
    c = _as_fraction(c)
    mult = 4 if offset_kind == "plain" else 16
    return floor_exp(LogVal(2 * c) + LogVal.log(mult)) + 1


# --------------------------------------------------------------------------
# Weighted badness
# --------------------------------------------------------------------------

def weighted_bad_check(outcome: Box, weights: Sequence[Fraction], Q: int,
                       threshold: Optional[Exact] = None) -> dict:
    """Certified lower bound on q * max_i |q x_i - p_i|^(1/r_i) over q <= Q.

    Also reports the per-display normalization max_i |x_i - p_i/q| q^(1+r_i)
    and, when a threshold is supplied, certifies min >= threshold exactly.
    """
    weights = [_as_fraction(w) for w in weights]
    n = len(weights)
    hull = outcome.rational_hull()
    best_norm = None          # float report of the display normalization
    best_value = None         # float report of q * max d^(1/r)
    pass_all = True
    q_min = None
    for q in range(1, Q + 1):
        axis_min: List[Exact] = []
        for i in range(n):
            lo, hi = outcome.axes[i]
            qlo, qhi = hull[i][0] * q, hull[i][1] * q
            cands = range(qlo.__floor__() - 1, qhi.__ceil__() + 2)
            d_best: Optional[Exact] = None
            for p in cands:
                d = _axis_distance(lo * q, hi * q, p)
                if d_best is None or d.cmp(d_best) < 0:
                    d_best = d
            axis_min.append(d_best)
        # independence: min over p-bar of max_i = max_i of per-axis min
        norm_vals = []
        val_vals = []
        for i in range(n):
            d = axis_min[i]
            df = max(d.approx(), 0.0)
            norm_vals.append(df / q * q ** (1 + float(weights[i])))
            val_vals.append(q * df ** (1 / float(weights[i])) if df > 0 else 0.0)
        norm = max(norm_vals)
        value = max(val_vals)
        if best_norm is None or norm < best_norm:
            best_norm, q_min = norm, q
        if best_value is None or value < best_value:
            best_value = value
        if threshold is not None:
            ok = False
            for i in range(n):
                # d_i >= threshold * q^(r_i) certifies the display bound
                rhs = threshold * Exact.rat_pow(q, weights[i]) * q
                if axis_min[i].cmp(rhs * Fraction(1, q)) >= 0:
                    ok = True
                    break
            if not ok:
                pass_all = False
    return {
        "min_display_normalized": best_norm,
        "min_check_value": best_value,
        "q_min": q_min,
        "pass": pass_all,
    }


def _axis_distance(qlo: Exact, qhi: Exact, p: int) -> Exact:
    """inf over x-range of |x - p| for the symbolic interval [qlo, qhi]."""
    below = (Exact.of(p) - qhi)
    above = (qlo - Exact.of(p))
    if below.sign() > 0:
        return below
    if above.sign() > 0:
        return above
    return Exact.zero()


# --------------------------------------------------------------------------
# Shift and toral checks
# --------------------------------------------------------------------------

def shift_check(prefix: Sequence[int], period_word: Sequence[int], c: int,
                rounds: int) -> bool:
    """No shift of the prefix opens with the first p+c+1 periodic symbols."""
    prefix = tuple(prefix)
    period = tuple(period_word)
    p = len(period)
    need = rounds + p + c + 1
    if len(prefix) < need:
        raise PrefixTooShort(f"prefix of {len(prefix)} symbols; need {need}")
    pat = tuple(period[i % p] for i in range(p + c + 1))
    for k in range(rounds):
        if prefix[k:k + p + c + 1] == pat:
            return False
    return True


def toral_check(outcome: Box, family: ToralFamily, cbar: Exact, K: int) -> bool:
    """d(M_k x, z) >= cbar * tau_k for all x in the outcome box, k <= K,
    z in the target set; exact squared-distance comparisons."""
    if K == 0:
        return True
    for k in range(min(K, family.K)):
        tau = family.taus[k]
        m = family.mats[k]
        n = family.dim
        corners = _image_corners(m, outcome)
        ranges = [(min(c[i] for c in corners), max(c[i] for c in corners))
                  for i in range(n)]
        # lattice points near the image hull, padded by one
        cand_ranges = []
        for lo, hi in ranges:
            cand_ranges.append(range(lo.lower_rational().__floor__() - 1,
                                     hi.upper_rational().__ceil__() + 2))
        thresh2 = cbar * cbar * (tau * tau)
        for z in _product(cand_ranges):
            gap2 = Exact.zero()
            for i in range(n):
                lo, hi = ranges[i]
                below = Exact.of(z[i]) - hi
                above = lo - Exact.of(z[i])
                if below.sign() > 0:
                    gap2 = gap2 + below * below
                elif above.sign() > 0:
                    gap2 = gap2 + above * above
            if gap2.cmp(thresh2) < 0:
                return False
    return True


def _image_corners(m, box: Box):
    n = len(m)
    corners = []
    for idx in range(2 ** n):
        v = [box.axes[i][1] if (idx >> i) & 1 else box.axes[i][0]
             for i in range(n)]
        corners.append([sum(v[j] * m[i][j] for j in range(n)) for i in range(n)])
    return corners


def _product(ranges):
    if not ranges:
        yield ()
        return
    for head in ranges[0]:
        for rest in _product(ranges[1:]):
            yield (head,) + rest


# --------------------------------------------------------------------------
# Measure audits
# --------------------------------------------------------------------------

def measure_decay_check(measure: MeasureSpec, spec: PsiSpec,
                        obstacle_class: str, samples: int,
                        seed: int = 0) -> dict:
    """Sampled ratios mu(ball cap obstacle-neighborhood) / mu(ball) against
    the declared envelope c_delta e^(-delta s); masses stay symbolic, so the
    generic boundary case (ratio exactly e^-s) is decided by cancellation."""
    rng = random.Random(seed)
    dec = measure.decay
    worst = 0.0
    violations = 0
    for _ in range(samples):
        ball, t = _sample_ball(measure, spec, rng)
        s = Fraction(rng.randrange(0, 33), 4)
        region = psi_eval(spec, ball)
        inter = _obstacle_intersection_mass(
            measure, spec, region, ball, t, s, obstacle_class, rng)
        envelope = Exact.exp(LogVal(-dec.delta * s)) * dec.c_delta
        if measure.kind == "cantor":
            mass = Exact.of(region_mass(measure, region)[0])
        elif measure.kind == "shift_uniform":
            mass = Exact.of(cylinder_mass(region))
        else:
            mass = box_volume(region)
        allowed = envelope * mass
        if (inter - allowed).sign() > 0:
            violations += 1
        denom = allowed.approx()
        if denom > 0:
            worst = max(worst, inter.approx() / denom)
    return {"samples": samples, "violations": violations,
            "worst_ratio_vs_bound": worst}


def _sample_ball(measure: MeasureSpec, spec: PsiSpec, rng) -> Tuple[FormalBall, Fraction]:
    t = Fraction(rng.randrange(4, 25), 4)
    if spec.kind == "shift":
        word = tuple(rng.randrange(spec.alphabet) for _ in range(int(t) + 12))
        return FormalBall(Point.of_word(word), Fraction(int(t))), Fraction(int(t))
    coords = []
    for _ in range(spec.dim):
        coords.append(Fraction(rng.randrange(0, 257), 256))
    if measure.kind == "cantor":
        cells = cantor_cells(Fraction(0), Fraction(1), 6)
        a, b = cells[rng.randrange(len(cells))]
        coords = [a]
    return FormalBall(Point.euclidean(*coords), t), t


def _obstacle_intersection_mass(measure, spec, region, ball, t, s,
                                obstacle_class, rng) -> Exact:
    """Mass (or certified upper value) of region cap obstacle-neighborhood."""
    if spec.kind == "shift":
        depth = int(t + math.ceil(s))
        word = ball.center.word
        # periodic-word style obstacle through a random nearby word
        obs_word = tuple(word[i] if i < int(t) and rng.random() < 0.9
                         else rng.randrange(spec.alphabet) for i in range(depth))
        obs = Cylinder(obs_word, spec.alphabet)
        inter = cylinder_mass(obs) if obs.word[:region.depth] == region.word \
            else Fraction(0)
        return Exact.of(inter)
    n = spec.dim
    center = ball.center.coords
    if obstacle_class == "points":
        y = tuple(c + _dyadic_floor(spec.radius(i, t).lower_rational())
                  * Fraction(rng.randrange(-32, 33), 32)
                  for i, c in enumerate(center))
        piece = Box(tuple(_point_axes(spec, y, t + s)))
        inter = _box_intersection(region, piece)
        if inter is None:
            return Exact.zero()
        if measure.kind == "cantor":
            return Exact.of(region_mass(measure, inter)[1])
        return box_volume(inter)
    # hyperplanes: axis-aligned always; generic rational normals in the plane
    if n == 2 and rng.random() < 0.4:
        normal = (Fraction(rng.choice([1, 1, 2])), Fraction(rng.choice([1, -1])))
    else:
        axis = rng.randrange(n)
        normal = tuple(Fraction(1) if i == axis else Fraction(0) for i in range(n))
    offset = sum(a * (c + _dyadic_floor(spec.radius(i, t).lower_rational())
                      * Fraction(rng.randrange(-16, 17), 16))
                 for i, (a, c) in enumerate(zip(normal, center)))
    width = Exact.zero()
    for i, a in enumerate(normal):
        if a:
            width = width + spec.radius(i, t + s) * abs(a)
    if measure.kind != "lebesgue":
        raise ValueError("hyperplane decay audits need Lebesgue measure")
    return _box_slab_volume(region, normal, offset, width)


def _point_axes(spec, y, h):
    out = []
    for i, c in enumerate(y):
        r = spec.radius(i, h)
        ce = Exact.of(c)
        out.append((ce - r, ce + r))
    return out


def _box_intersection(a: Box, b: Box) -> Optional[Box]:
    axes = []
    for (alo, ahi), (blo, bhi) in zip(a.axes, b.axes):
        lo = alo if alo.cmp(blo) >= 0 else blo
        hi = ahi if ahi.cmp(bhi) <= 0 else bhi
        if lo.cmp(hi) > 0:
            return None
        axes.append((lo, hi))
    return Box(tuple(axes))


def _box_slab_volume(box: Box, normal, offset, width: Exact) -> Exact:
    """Exact volume of box cap {|<a, x> - offset| <= width} (dim 1 or 2).

    In the plane the sublevel area u -> area(box cap {<a,x> <= u}) is
    piecewise quadratic with denominators a1*a2 only, so the clipped area
    stays in the exact value class and ties are decided symbolically.
    """
    n = box.dim
    if n == 1 or sum(1 for a in normal if a != 0) == 1:
        # one effective axis
        axis = next(i for i, a in enumerate(normal) if a != 0)
        a = normal[axis]
        lo, hi = box.axes[axis]
        w = width * Fraction(1, abs(a))
        c = Exact.of(offset * Fraction(1, a))
        slo, shi = c - w, c + w
        l = lo if lo.cmp(slo) >= 0 else slo
        h = hi if hi.cmp(shi) <= 0 else shi
        gap = h - l
        if gap.sign() <= 0:
            return Exact.zero()
        for i, (xlo, xhi) in enumerate(box.axes):
            if i != axis:
                gap = gap * (xhi - xlo)
        return gap
    if n != 2:
        raise ValueError("generic slab volumes implemented for dimension 2")
    a1, a2 = normal
    (xlo, xhi), (ylo, yhi) = box.axes
    # normalize to positive coefficients by reflecting axes
    if a1 < 0:
        a1, xlo, xhi = -a1, -1 * xhi, -1 * xlo
    if a2 < 0:
        a2, ylo, yhi = -a2, -1 * yhi, -1 * ylo
    up = Exact.of(offset) + width
    dn = Exact.of(offset) - width
    return _sublevel_area(a1, a2, xlo, xhi, ylo, yhi, up) \
        - _sublevel_area(a1, a2, xlo, xhi, ylo, yhi, dn)


def _sublevel_area(a1: Fraction, a2: Fraction, xlo, xhi, ylo, yhi,
                   u: Exact) -> Exact:
    """area(box cap {a1 x + a2 y <= u}) for a1, a2 > 0, exactly."""
    v0 = xlo * a1 + ylo * a2
    vA = xhi * a1 + ylo * a2
    vB = xlo * a1 + yhi * a2
    v3 = xhi * a1 + yhi * a2
    v1 = vA if vA.cmp(vB) <= 0 else vB
    v2 = vB if vA.cmp(vB) <= 0 else vA
    wx = xhi - xlo
    wy = yhi - ylo
    total = wx * wy
    inv = Fraction(1, 2) / (a1 * a2)
    if u.cmp(v0) <= 0:
        return Exact.zero()
    if u.cmp(v3) >= 0:
        return total
    if u.cmp(v1) <= 0:
        d = u - v0
        return d * d * inv
    if u.cmp(v2) <= 0:
        d1 = v1 - v0
        tri = d1 * d1 * inv
        # constant cross-section of length (v1 - v0)/(a1 a2) past the corner
        return tri + (u - v1) * d1 * (2 * inv)
    d = v3 - u
    return total - d * d * inv


def power_law_check(measure: MeasureSpec, spec: PsiSpec, samples: int,
                    seed: int = 0) -> dict:
    """Sampled masses bracketed by the declared power-law envelope."""
    pl = measure.power_law
    rng = random.Random(seed)
    worst_lo = worst_hi = 1.0
    for _ in range(samples):
        ball, t = _sample_ball(measure, spec, rng)
        region = psi_eval(spec, ball)
        mlo, mhi = region_mass(measure, region)
        (lo_lo, lo_hi), (hi_lo, hi_hi) = power_law_envelope_bounds(pl, t)
        if mlo < lo_lo and mlo < lo_hi:
            if mhi < lo_lo:
                raise PowerLawViolation(ball, "mass below the lower envelope")
        if mhi > hi_hi and mhi > hi_lo:
            if mlo > hi_hi:
                raise PowerLawViolation(ball, "mass above the upper envelope")
        if lo_hi > 0:
            worst_lo = min(worst_lo, float(mlo / lo_hi))
        if hi_lo > 0:
            worst_hi = max(worst_hi, float(mhi / hi_lo))
    return {"samples": samples, "min_vs_lower": worst_lo, "max_vs_upper": worst_hi}


def exact_power_law_identity(measure: MeasureSpec, spec: PsiSpec,
                             trials: int, seed: int = 0) -> bool:
    """Exact identities: Lebesgue mass 2^n e^-(n+1)t for the weighted box,
    uniform shift mass alphabet^-t for the depth-t cylinder."""
    rng = random.Random(seed)
    for _ in range(trials):
        ball, t = _sample_ball(measure, spec, rng)
        region = psi_eval(spec, ball)
        if measure.kind == "lebesgue" and spec.kind == "weighted":
            vol = box_volume(region)
            n = spec.dim
            want = Exact.exp(LogVal(-(n + 1) * t)) * (2 ** n)
            if not (vol - want).is_zero():
                return False
        elif measure.kind == "shift_uniform":
            if cylinder_mass(region) != Fraction(1, spec.alphabet ** int(t)):
                return False
        else:
            raise ValueError("identity check covers weighted Lebesgue and shift")
    return True


# --------------------------------------------------------------------------
# Dimension lower bound
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class DimensionEstimate:
    instance_id: str
    b: Fraction
    m_star: int
    depth: int
    d_mu: float
    theoretical_bound: float
    empirical_slope: float
    child_min: int
    child_geomean: float
    c_min: float
    nodes: int

    def to_json(self) -> dict:
        return {
            "instance_id": self.instance_id,
            "b": f"{self.b.numerator}/{self.b.denominator}",
            "m_star": self.m_star,
            "depth": self.depth,
            "d_mu": self.d_mu,
            "theoretical_bound": self.theoretical_bound,
            "empirical_slope": self.empirical_slope,
            "child_min": self.child_min,
            "child_geomean": self.child_geomean,
            "c_min": self.c_min,
            "nodes": self.nodes,
        }


def _msg2_sigma(spec: PsiSpec) -> Fraction:
    if spec.kind == "shift":
        return Fraction(1)
    return spec.min_exponent()


def _d_mu(measure: MeasureSpec, spec: PsiSpec) -> float:
    if measure.kind == "lebesgue":
        return float(spec.dim)
    if measure.kind == "cantor":
        return math.log(2) / math.log(3)
    if measure.kind == "shift_uniform":
        return math.log(spec.alphabet)
    raise ValueError("declare d_mu for this measure kind")


def dimension_lower_bound(instance: Instance, b: Rat, depth: int,
                          level_cap: int = 48, seed: int = 0) -> DimensionEstimate:
    """Survivor tree of pairwise-disjoint legal children under the strategy.

    Expands breadth-first with a per-level cap (children are complete per
    expanded node; the cap only limits which nodes get expanded further).
    """
    from .strategy import strong_strategy_step, weak_strategy_step

    b = _as_fraction(b)
    rng = random.Random(seed)
    spec = instance.spec
    support = instance.support
    witness = instance.witness
    params = GameParams(b=b, seed=seed)
    params.check(witness)
    g = new_game(instance, params, BStrategy.random())
    root = g.ball
    m_star = g.m_star
    btilde = m_star * b

    level = [root]
    counts: List[int] = []
    ratios: List[Fraction] = []
    nodes = 0
    for _ in range(depth):
        nxt: List[FormalBall] = []
        for ball in level:
            if instance.strategy_mode == "weak" or witness.strength != "strong":
                plan = weak_strategy_step(support, spec, instance.family, witness,
                                          ball, b, m_star, 1)
            else:
                plan = strong_strategy_step(support, spec, instance.family,
                                            witness, ball, b, 1)
                plan = _lift_plan(plan, ball, btilde)
            kids = _disjoint_children(support, spec, ball, plan, btilde)
            nodes += 1
            if len(kids) < 2:
                raise ChildCountCollapse(ball)
            counts.append(len(kids))
            if instance.measure is not None:
                num = Fraction(0)
                for kid in kids:
                    num += region_mass(instance.measure, psi_eval(spec, kid))[0]
                den = region_mass(instance.measure, psi_eval(spec, ball))[1]
                if den > 0:
                    ratios.append(num / den)
            nxt.extend(kids)
        if len(nxt) > level_cap:
            nxt = rng.sample(nxt, level_cap)
            nxt.sort(key=lambda fb: (str(fb.center.word) if fb.center.word
                                     else tuple(map(float, fb.center.coords))))
        level = nxt
    sigma = _msg2_sigma(spec)
    geomean = math.exp(sum(math.log(c) for c in counts) / len(counts))
    slope = math.log(geomean) / (float(sigma) * float(btilde))
    d_mu = _d_mu(instance.measure, spec)
    c_min = min(ratios) if ratios else Fraction(0)
    bound = d_mu + (math.log(float(c_min)) / (float(sigma) * float(btilde))
                    if c_min > 0 else float("-inf"))
    return DimensionEstimate(
        instance_id=instance.id, b=b, m_star=m_star, depth=depth,
        d_mu=d_mu, theoretical_bound=bound, empirical_slope=slope,
        child_min=min(counts), child_geomean=geomean,
        c_min=float(c_min), nodes=nodes)


def _lift_plan(plan, ball, btilde):
    """Strong plans park the witness at t + b*; children live at t + b-tilde."""
    from .strategy import AvoidancePlan
    return AvoidancePlan(
        round_index=plan.round_index, obstacle=plan.obstacle,
        obstacle_kind=plan.obstacle_kind, obstacle_count=plan.obstacle_count,
        deletion_height=plan.deletion_height,
        witness_ball=FormalBall(plan.witness_ball.center,
                                ball.t + btilde),
        window_lo=plan.window_lo, window_hi=btilde)


def _disjoint_children(support, spec, ball, plan, btilde) -> List[FormalBall]:
    target = ball.t + btilde
    kids: List[FormalBall] = []
    if spec.kind == "shift":
        from .strategy import _words_lex
        base = ball.center.word[: int(ball.t)]
        ext = int(target - ball.t)
        for cand in _words_lex(spec.alphabet, ext):
            w = base + cand
            cyl = Cylinder(w, spec.alphabet)
            from .geometry import disjoint_from_all
            if disjoint_from_all(cyl, plan.obstacle) is Tri.YES:
                kids.append(FormalBall(Point.of_word(w), target))
        return kids
    n = spec.dim
    center = ball.center.coords
    slack, rad = [], []
    for i in range(n):
        slack.append(_dyadic_floor((spec.radius(i, ball.t)
                                    - spec.radius(i, target)).lower_rational()))
        rad.append(_dyadic_ceil(spec.radius(i, target).upper_rational()))
    steps = [2 * r * Fraction(17, 16) for r in rad]
    grids = []
    for i in range(n):
        cnt = int(slack[i] / steps[i])
        if support.kind == "cantor":
            break
        grids.append([center[i] + j * steps[i] for j in range(-cnt, cnt + 1)])
    if support.kind == "cantor":
        cand_pts = _cantor_disjoint_candidates(center, slack, rad)
    else:
        cand_pts = list(_product_lists(grids))
    from .geometry import disjoint_from_all
    for pt in cand_pts:
        p = Point(coords=tuple(pt))
        if not support.contains_point(p):
            continue
        fb = FormalBall(p, target)
        region = psi_eval(spec, fb)
        if contains(psi_eval(spec, ball), region) is not Tri.YES:
            continue
        if plan.obstacle and disjoint_from_all(region, plan.obstacle) is not Tri.YES:
            continue
        kids.append(fb)
    return kids


def _cantor_disjoint_candidates(center, slack, rad):
    lo = max(Fraction(0), center[0] - slack[0])
    hi = min(Fraction(1), center[0] + slack[0])
    depth = 1
    w = Fraction(1, 3)
    # cells wide enough that distinct left endpoints give disjoint balls
    while w / 3 > 2 * rad[0] and depth < 200:
        w /= 3
        depth += 1
    return [(a,) for a, b in cantor_cells(lo, hi, depth)]


def _product_lists(lists):
    if not lists:
        yield ()
        return
    for h in lists[0]:
        for rest in _product_lists(lists[1:]):
            yield (h,) + rest


# --------------------------------------------------------------------------
# Transcript audit
# --------------------------------------------------------------------------

def transcript_audit(transcript: Transcript, instance: Instance) -> bool:
    """Replay every move through the validator; the rebuilt transcript must
    match the recorded one bit for bit (certificate reference aside)."""
    b_moves = [m.ball for m in transcript.moves if m.role == "B"]
    if not b_moves:
        raise AuditFailure(0, "no opening move")
    replies = len(b_moves) - 1
    try:
        g = new_game(instance, transcript.params, BStrategy.scripted(b_moves))
        rebuilt = g.run(replies)
    except (BStalled, IllegalMove, InconsistentParams) as exc:
        idx = getattr(exc, "reason", str(exc))
        raise AuditFailure(_stall_index(exc, transcript), str(idx))
    a = _strip_cert(rebuilt.dumps())
    b = _strip_cert(transcript.dumps())
    if a != b:
        k = _first_divergence(rebuilt, transcript)
        raise AuditFailure(k, "replay diverged from the recorded transcript")
    return True


def _stall_index(exc, transcript) -> int:
    return len(transcript.moves)


def _first_divergence(a: Transcript, b: Transcript) -> int:
    for i, (x, y) in enumerate(zip(a.moves, b.moves)):
        if x != y:
            return i
    return min(len(a.moves), len(b.moves))


def _strip_cert(blob: str) -> str:
    data = json.loads(blob)
    data["outcome"]["certificate_id"] = None
    return json.dumps(data, sort_keys=True, separators=(",", ":"))


def audit_classic_as_weak(transcript: Transcript, instance: Instance) -> bool:
    """A classic transcript replays as a legal weak game with b-tilde = a+b:
    every B reply stays inside the previous B ball with the composite
    increment and clear of the recomputed deletion set."""
    from .strategy import strong_strategy_step

    params = transcript.params
    if params.variant != "classic":
        raise AuditFailure(0, "not a classic transcript")
    btilde = params.a + params.b
    b_moves = [m.ball for m in transcript.moves if m.role == "B"]
    for i in range(len(b_moves) - 1):
        prev, nxt = b_moves[i], b_moves[i + 1]
        if nxt.t - prev.t != btilde:
            raise AuditFailure(i + 1, "composite increment off")
        if contains(psi_eval(instance.spec, prev),
                    psi_eval(instance.spec, nxt)) is not Tri.YES:
            raise AuditFailure(i + 1, "nesting violated")
        if instance.witness.b_star > btilde:
            raise AuditFailure(i + 1, "window violated")
        plan = strong_strategy_step(instance.support, instance.spec,
                                    instance.family, instance.witness, prev,
                                    params.b, i + 1)
        from .geometry import disjoint_from_all
        if plan.obstacle and disjoint_from_all(
                psi_eval(instance.spec, nxt), plan.obstacle) is not Tri.YES:
            raise AuditFailure(i + 1, "deletion set hit")
    return True
