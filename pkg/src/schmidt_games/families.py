"""Nested, discrete resonant families with bounded member enumeration.

A family assigns to every index a resonant set and a size; enumeration is
always against a query box (or cylinder) and is complete: no member whose
set meets the query region is missed.  Sizes live on the exponent line
(LogVal) because most of them are logarithms.

Four concrete instances:

* RationalFamily      -- {p/q : q < k} with size log k (+ optional offset)
* HoroballFamily      -- tangency points of disjoint horoballs, Farey or listed
* PeriodicWordFamily  -- prefixes glued to a periodic tail in a shift space
* ToralFamily         -- expanding matrices vs separated target sets
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

from .errors import (
    DiscretenessViolation,
    EnumerationBudgetExceeded,
    NestednessViolation,
    SeparationViolation,
    VolumeTooLarge,
)
from .exactnum import Exact, LogVal, Rat, _as_fraction
from .geometry import (
    Box,
    Cylinder,
    Piece,
    PsiSpec,
    Slab,
    WordPoint,
)

DEFAULT_BUDGET = 10_000

SizeLike = Union[LogVal, Fraction, int]


def _as_logval(x: SizeLike) -> LogVal:
    return x if isinstance(x, LogVal) else LogVal(_as_fraction(x))


# --------------------------------------------------------------------------
# Exponent-line integer helpers
# --------------------------------------------------------------------------

def floor_logval(u: LogVal) -> int:
    """Largest integer <= u, exact."""
    r = u.is_rational()
    if r is not None:
        return r.numerator // r.denominator
    lo, hi = u.bounds(128)
    n = lo.numerator // lo.denominator
    while u.cmp(LogVal(n + 1)) >= 0:
        n += 1
    while u.cmp(LogVal(n)) < 0:
        n -= 1
    return n


def ceil_logval(u: LogVal) -> int:
    return -floor_logval(-u)


def floor_exp(u: LogVal) -> int:
    """Largest integer <= e^u (0 when e^u < 1)."""
    val = Exact.exp(u)
    lo, _ = val.bounds(128)
    n = max(0, lo.numerator // lo.denominator)
    while val.cmp(Exact.of(n + 1)) >= 0:
        n += 1
    while n > 0 and val.cmp(Exact.of(n)) < 0:
        n -= 1
    return n


# --------------------------------------------------------------------------
# Stern-Brocot enumeration of bounded-denominator rationals
# --------------------------------------------------------------------------

def stern_brocot_le(x: Fraction, qmax: int) -> Tuple[int, int, int, int]:
    """Consecutive Farey-qmax neighbors (a/b, c/d) with a/b <= x < c/d."""
    if qmax < 1:
        raise ValueError("qmax >= 1 required")
    fl = x.numerator // x.denominator
    a, b, c, d = fl, 1, fl + 1, 1
    while True:
        # descend right: a/b <- mediants while they stay <= x
        denom = c - x * d
        if denom <= 0:
            raise AssertionError("invariant x < c/d broken")
        k = (x * b - a) / denom  # max real steps with (a+kc)/(b+kd) <= x
        k = k.numerator // k.denominator
        kcap = (qmax - b) // d
        if k > 0:
            step = min(k, kcap)
            a, b = a + step * c, b + step * d
            if step == kcap and k > kcap:
                break
        # descend left: c/d <- mediants while they stay > x
        num = a + c
        den = b + d
        if den > qmax:
            break
        # largest j with (j*a + c)/(j*b + d) > x
        denom2 = x * b - a
        if denom2 == 0:
            j = (qmax - d) // b  # x == a/b: push c/d as low as possible
        else:
            jr = (c - x * d) / denom2
            j = jr.numerator // jr.denominator
            if jr == j:
                j -= 1  # strict: mediant must stay > x
            j = max(j, 0)
        j = min(j, (qmax - d) // b)
        if j > 0:
            c, d = c + j * a, d + j * b
        elif num <= 0 or den > qmax:
            break
        else:
            m = Fraction(num, den)
            if m > x:
                c, d = num, den
            else:
                a, b = num, den
    return a, b, c, d


def fractions_in_interval(lo: Fraction, hi: Fraction, qmax: int,
                          budget: int = DEFAULT_BUDGET) -> List[Fraction]:
    """All reduced p/q with q <= qmax in [lo, hi], ascending."""
    if qmax < 1 or hi < lo:
        return []
    a, b, c, d = stern_brocot_le(lo, qmax)
    out: List[Fraction] = []
    if Fraction(a, b) == lo:
        out.append(Fraction(a, b))
    # iterate the Farey sequence: consecutive terms a/b < c/d
    while Fraction(c, d) <= hi:
        out.append(Fraction(c, d))
        if len(out) > budget:
            raise EnumerationBudgetExceeded(budget, "rational enumeration blew the budget")
        k = (qmax + b) // d
        a, b, c, d = c, d, k * c - a, k * d - b
    return out


# --------------------------------------------------------------------------
# Members
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class HyperplanePiece:
    normal: Tuple[Fraction, ...]
    offset: Fraction
    center: Tuple[Fraction, ...]          # bbox center
    halfwidths: Tuple[Exact, ...]         # bbox half-widths per axis


@dataclass(frozen=True)
class Member:
    """One resonant element together with its minimal size."""

    size: LogVal
    point: Optional[Tuple[Fraction, ...]] = None
    word: Optional[WordPoint] = None
    piece: Optional[HyperplanePiece] = None

    def key(self):
        if self.point is not None:
            return ("pt", self.point)
        if self.word is not None:
            return ("w", self.word.head, self.word.period)
        p = self.piece
        return ("hp", p.normal, p.offset, p.center)


def member_neighborhood(spec: PsiSpec, m: Member, height: SizeLike) -> Piece:
    """Realization of the psi-neighborhood of one member at a given height."""
    h = _as_logval(height)
    if m.point is not None:
        axes = []
        for i, c in enumerate(m.point):
            rad = Exact.exp(h.scale(-spec.axis_exponents()[i]))
            ce = Exact.of(c)
            axes.append((ce - rad, ce + rad))
        return Box(tuple(axes))
    if m.word is not None:
        depth = h.is_rational()
        if depth is None or depth.denominator != 1:
            raise ValueError("shift neighborhood heights must be integers")
        return Cylinder(m.word.prefix(int(depth)), spec.alphabet)
    p = m.piece
    width = Exact.zero()
    exps = spec.axis_exponents()
    for i, a in enumerate(p.normal):
        if a:
            width = width + Exact.exp(h.scale(-exps[i])) * abs(a)
    pads = tuple(Exact.exp(h.scale(-exps[i])) for i in range(len(p.center)))
    bbox = Box(tuple((Exact.of(c) - hw - pad, Exact.of(c) + hw + pad)
                     for c, hw, pad in zip(p.center, p.halfwidths, pads)))
    return Slab(p.normal, p.offset, width, bbox=bbox)


def _point_in_hull(pt: Sequence[Fraction], hull) -> bool:
    return all(lo <= c <= hi for c, (lo, hi) in zip(pt, hull))


# --------------------------------------------------------------------------
# Family instances
# --------------------------------------------------------------------------

class RationalFamily:
    """R_k = {p/q : p integer vector, 0 < q < k}, size log k (+ offset)."""

    kind = "rational"

    def __init__(self, dim: int, weights: Optional[Sequence[Rat]] = None,
                 offset: str = "plain", budget: int = DEFAULT_BUDGET):
        if offset not in ("plain", "volume"):
            raise ValueError("offset is 'plain' (log k) or 'volume' (log k + log(n! 2^n))")
        self.dim = dim
        self.weights = tuple(_as_fraction(w) for w in (weights or [Fraction(1, dim)] * dim))
        self.offset_kind = offset
        self.budget = budget
        n = dim
        self._off = LogVal.log(math.factorial(n) * 2 ** n) if offset == "volume" else LogVal(0)
        self.min_index = 2

    def size_of(self, k: int) -> LogVal:
        if k < 2:
            raise ValueError("indices start at 2")
        return LogVal.log(k) + self._off

    def relevant_index(self, t: SizeLike) -> Optional[int]:
        t = _as_logval(t)
        k = floor_exp(t - self._off)
        return k if k >= 2 else None

    def member_min_size(self, q: int) -> LogVal:
        return self.size_of(q + 1)

    def members(self, hull, hi_size: SizeLike, lo_size: Optional[SizeLike] = None,
                budget: Optional[int] = None) -> List[Member]:
        """Members of R(hi) - R(lo) whose point lies in the rational hull."""
        budget = budget or self.budget
        k_hi = self.relevant_index(hi_size)
        if k_hi is None:
            return []
        q_hi = k_hi - 1
        q_lo = 1
        if lo_size is not None:
            k_lo = self.relevant_index(lo_size)
            if k_lo is not None:
                q_lo = k_lo  # q >= k_lo means min size log(q+1) > lo
        if q_lo > q_hi:
            return []
        out: List[Member] = []
        if self.dim == 1:
            lo, hi = hull[0]
            for f in fractions_in_interval(lo, hi, q_hi, budget):
                if f.denominator >= q_lo:
                    out.append(Member(size=self.member_min_size(f.denominator),
                                      point=(f,)))
            out.sort(key=lambda m: (m.point[0], ))
            return out
        count = 0
        for q in range(q_lo, q_hi + 1):
            ranges = []
            for lo, hi in hull:
                plo = (lo * q).__ceil__()
                phi = (hi * q).__floor__()
                if plo > phi:
                    ranges = None
                    break
                ranges.append(range(plo, phi + 1))
            if ranges is None:
                continue
            # odometer over the small per-axis integer ranges; keep only
            # points whose minimal denominator is this q (gcd with q is 1)
            def rec(axis, acc):
                nonlocal count
                if axis == len(ranges):
                    g = q
                    for p in acc:
                        g = math.gcd(g, p)
                    if g != 1:
                        return
                    count += 1
                    if count > budget:
                        raise EnumerationBudgetExceeded(budget)
                    out.append(Member(size=self.member_min_size(q),
                                      point=tuple(Fraction(p, q) for p in acc)))
                    return
                for p in ranges[axis]:
                    rec(axis + 1, acc + [p])
            rec(0, [])
        out.sort(key=lambda m: m.point)
        return out


class HoroballFamily:
    """Tangency points x_l with radii r_l of pairwise disjoint horoballs.

    R_k = {x_l : r_l >= e^-k} with size k + log 2.  The farey flag swaps the
    explicit list for the full Ford configuration x_{p/q} = p/q, r = 1/(2 q^2).
    """

    kind = "horoball"

    def __init__(self, entries: Optional[Sequence[Tuple[Rat, Rat]]] = None,
                 farey: bool = False, budget: int = DEFAULT_BUDGET):
        self.farey = farey
        self.budget = budget
        self.min_index = 1
        self._log2 = LogVal.log(2)
        if farey:
            self.entries = None
            return
        es = [( _as_fraction(x), _as_fraction(r)) for x, r in (entries or [])]
        for x, r in es:
            if not (0 < r <= 1):
                raise ValueError("radii must lie in (0, 1]")
        for i in range(len(es)):
            for j in range(i + 1, len(es)):
                (x1, r1), (x2, r2) = es[i], es[j]
                # tangency is fine (Ford circles touch); overlap is not
                if (x1 - x2) ** 2 < 4 * r1 * r2:
                    raise ValueError(f"horoballs at {x1} and {x2} overlap")
        self.entries = es

    def size_of(self, k: int) -> LogVal:
        return LogVal(k) + self._log2

    def relevant_index(self, t: SizeLike) -> Optional[int]:
        k = floor_logval(_as_logval(t) - self._log2)
        return k if k >= 1 else None

    def _member_k(self, r: Fraction) -> int:
        """Minimal integer k with r >= e^-k, i.e. k = ceil(log(1/r)).

        Works on the integer ratio directly (1/r >= 1 here), so no
        factorization of large denominators is ever attempted.
        """
        inv = 1 / r
        k = max(1, math.ceil(math.log(float(inv.numerator))
                             - math.log(float(inv.denominator))))
        while Exact.exp(LogVal(k)).cmp(Exact.of(inv)) < 0:
            k += 1
        while k > 1 and Exact.exp(LogVal(k - 1)).cmp(Exact.of(inv)) >= 0:
            k -= 1
        return k

    def members(self, hull, hi_size: SizeLike, lo_size: Optional[SizeLike] = None,
                budget: Optional[int] = None) -> List[Member]:
        budget = budget or self.budget
        k_hi = self.relevant_index(hi_size)
        if k_hi is None:
            return []
        k_lo = self.relevant_index(lo_size) if lo_size is not None else None
        lo, hi = hull[0]
        out: List[Member] = []
        if self.farey:
            # r = 1/(2 q^2) >= e^-k  <=>  2 q^2 <= e^k
            q_hi = _isqrt_floor_exp(k_hi)
            if q_hi < 1:
                return []
            for f in fractions_in_interval(lo, hi, q_hi, budget):
                k_min = self._member_k(Fraction(1, 2 * f.denominator ** 2))
                if k_lo is not None and k_min <= k_lo:
                    continue
                out.append(Member(size=self.size_of(k_min), point=(f,)))
            return out
        for x, r in self.entries:
            if not (lo <= x <= hi):
                continue
            k_min = self._member_k(r)
            if k_min > k_hi:
                continue
            if k_lo is not None and k_min <= k_lo:
                continue
            out.append(Member(size=self.size_of(k_min), point=(x,)))
            if len(out) > budget:
                raise EnumerationBudgetExceeded(budget)
        out.sort(key=lambda m: m.point)
        return out


def _isqrt_floor_exp(k: int) -> int:
    """Largest q with 2 q^2 <= e^k."""
    n = floor_exp(LogVal(Fraction(k)))  # floor(e^k); exact because e^k irrational
    return math.isqrt(n // 2) if n >= 2 else 0


class PeriodicWordFamily:
    """Prefix-extensions of a periodic word: R_k = {w_l wbar : l <= k} + {wbar}."""

    kind = "periodic_word"

    def __init__(self, period_word: Sequence[int], alphabet: int,
                 budget: int = DEFAULT_BUDGET):
        self.period = tuple(period_word)
        if not self.period:
            raise ValueError("period word must be nonempty")
        if any(not (0 <= s < alphabet) for s in self.period):
            raise ValueError("period word uses symbols outside the alphabet")
        self.alphabet = alphabet
        self.p = len(self.period)
        self.budget = budget
        self.min_index = 0
        self._fail: List[int] = []  # KMP failure array of the periodic pattern

    def _pat(self, i: int) -> int:
        return self.period[i % self.p]

    def _ensure_failure(self, n: int) -> None:
        f = self._fail
        while len(f) < n:
            i = len(f)
            if i == 0:
                f.append(0)
                continue
            k = f[i - 1]
            while k and self._pat(i) != self._pat(k):
                k = f[k - 1]
            f.append(k + 1 if self._pat(i) == self._pat(k) else 0)

    def _suffix_prefix_chain(self, word: Tuple[int, ...]) -> List[int]:
        """All s such that the last s symbols of `word` spell the first s
        symbols of the periodic word (descending, 0 included)."""
        d = len(word)
        self._ensure_failure(d + 1)
        f = self._fail
        state = 0
        for ch in word:
            while state and (state >= d or self._pat(state) != ch):
                state = f[state - 1]
            if state < d and self._pat(state) == ch:
                state += 1
        chain = []
        s = state
        while s > 0:
            chain.append(s)
            s = f[s - 1]
        chain.append(0)
        return chain

    def size_of(self, k: int) -> LogVal:
        return LogVal(self.p + k + 1)

    def relevant_index(self, t: SizeLike) -> Optional[int]:
        k = floor_logval(_as_logval(t)) - self.p - 1
        return k if k >= 0 else None

    def _canonical_head(self, head: Tuple[int, ...]) -> Tuple[int, ...]:
        """Shortest head producing the same infinite word (set semantics)."""
        target = WordPoint(head, self.period).prefix(len(head) + 2 * self.p)
        for h in range(len(head) + 1):
            if WordPoint(head[:h], self.period).prefix(len(target)) == target:
                return head[:h]
        return head

    def members(self, cylinder_word: Tuple[int, ...], hi_size: SizeLike,
                lo_size: Optional[SizeLike] = None,
                budget: Optional[int] = None) -> List[Member]:
        """Members whose infinite word lies in the given cylinder.

        The resonant sets are point sets: a prefix that merely re-spells the
        periodic word is the same member.  Inside a cylinder of depth d, a
        member with prefix length l <= d is pinned entirely by the phase
        (d - l) mod p of its tail, and the admissible l are exactly the KMP
        border chain of the word against the periodic pattern, so there are
        at most p distinct members with prefix length <= d.
        """
        budget = budget or self.budget
        k_hi = self.relevant_index(hi_size)
        if k_hi is None:
            return []
        lo = _as_logval(lo_size) if lo_size is not None else None
        hi = _as_logval(hi_size)
        d = len(cylinder_word)
        seen: dict = {}  # canonical head -> size
        min_l_of_phase: dict = {}
        for s in self._suffix_prefix_chain(cylinder_word):
            l = d - s
            if l > k_hi:
                continue
            phi = s % self.p
            if phi not in min_l_of_phase or l < min_l_of_phase[phi]:
                min_l_of_phase[phi] = l
        for l in min_l_of_phase.values():
            seen[cylinder_word[:l]] = self.size_of(l)
        for l in range(d + 1, k_hi + 1):
            # prefixes longer than the cylinder depth: every extension of the
            # cylinder word qualifies; enumerate within the budget
            n_ext = self.alphabet ** (l - d)
            if len(seen) + n_ext > budget:
                raise EnumerationBudgetExceeded(budget)
            for ext in _all_words(self.alphabet, l - d):
                head = cylinder_word + ext
                canon = self._canonical_head(head)
                if canon not in seen:
                    seen[canon] = self.size_of(len(canon))
        out = []
        for head, size in seen.items():
            if size.cmp(hi) > 0:
                continue
            if lo is not None and size.cmp(lo) <= 0:
                continue
            out.append(Member(size=size, word=WordPoint(head, self.period)))
        out.sort(key=lambda m: (len(m.word.head), m.word.head))
        return out


def _periodic_fill(period, n):
    return tuple(period[i % len(period)] for i in range(n))


def _word_matches_prefix(w: WordPoint, prefix: Tuple[int, ...]) -> bool:
    return w.prefix(len(prefix)) == prefix


def _all_words(alphabet: int, length: int):
    if length == 0:
        yield ()
        return
    for rest in _all_words(alphabet, length - 1):
        for s in range(alphabet):
            yield (s,) + rest


class ToralFamily:
    """Orbits of expanding matrices vs separated targets.

    Matrices must have pairwise-orthogonal columns (diagonal matrices and
    scaled permutations qualify); then the top singular direction is an
    axis vector and all member hyperplanes have exact rational data.
    """

    kind = "toral"

    def __init__(self, mats: Sequence[Sequence[Sequence[Rat]]],
                 taus: Sequence[Rat], targets: str = "integer_lattice",
                 target_lists: Optional[Sequence[Sequence[Tuple[Rat, ...]]]] = None,
                 phi: Tuple[str, Rat] = ("lacunary", 2),
                 budget: int = DEFAULT_BUDGET):
        self.budget = budget
        self.min_index = 1
        self.phi = (phi[0], _as_fraction(phi[1]))
        self.targets = targets
        self.target_lists = target_lists
        self.K = len(mats)
        self.mats = [tuple(tuple(_as_fraction(x) for x in row) for row in m) for m in mats]
        self.taus = [_as_fraction(t) for t in taus]
        if len(self.taus) != self.K:
            raise ValueError("one tau per matrix")
        self._axis = []       # index j of the top singular direction
        self._colnorm2 = []   # squared column norms (diagonal of M^T M)
        for m in self.mats:
            n = len(m)
            cols = [[m[i][j] for i in range(n)] for j in range(n)]
            for j1 in range(n):
                for j2 in range(j1 + 1, n):
                    if sum(a * b for a, b in zip(cols[j1], cols[j2])) != 0:
                        raise ValueError("toral matrices need pairwise-orthogonal columns")
            norms2 = [sum(a * a for a in c) for c in cols]
            if any(x == 0 for x in norms2):
                raise ValueError("toral matrices must be invertible")
            self._colnorm2.append(norms2)
            self._axis.append(max(range(n), key=lambda j: norms2[j]))
        # sizes s_k = log(t_k / tau_k) + log 12, reordered ascending,
        # ties broken by the original index
        sized = []
        for k in range(self.K):
            s = self.log_expansion(k) - LogVal.log(self.taus[k].numerator) \
                + LogVal.log(self.taus[k].denominator) + LogVal.log(12)
            sized.append((s, k))
        sized.sort(key=lambda sk: (sk[0].bounds(128)[0], sk[1]))
        self.order = [k for _, k in sized]
        self.sizes = [s for s, _ in sized]

    @property
    def dim(self) -> int:
        return len(self.mats[0])

    def log_expansion(self, k: int) -> LogVal:
        """log t_k where t_k = ||M_k||_op = sqrt(max column norm^2)."""
        m2 = max(self._colnorm2[k])
        return (LogVal.log(m2.numerator) - LogVal.log(m2.denominator)).scale(Fraction(1, 2))

    def size_of(self, i: int) -> LogVal:
        if not (1 <= i <= self.K):
            raise ValueError("index out of horizon")
        return self.sizes[i - 1]

    def relevant_index(self, t: SizeLike) -> Optional[int]:
        t = _as_logval(t)
        best = None
        for i in range(1, self.K + 1):
            if self.sizes[i - 1].cmp(t) <= 0:
                best = i
            else:
                break
        return best

    def _mat_inv_apply(self, k: int, z: Sequence[Fraction]) -> Tuple[Fraction, ...]:
        m = self.mats[k]
        n = len(m)
        # M^-1 = D^-1 M^T with D = diag(column norms^2)
        out = []
        for j in range(n):
            s = sum(m[i][j] * z[i] for i in range(n))
            out.append(s / self._colnorm2[k][j])
        return tuple(out)

    def _targets_near(self, k: int, hull):
        """Candidate z in Z_k whose piece bbox can meet the hull.

        The bbox of the piece at z maps to z +- tau/4 per axis under M_k, so
        z ranges over the M_k-image of the hull padded by tau/4 (plus one
        lattice step of slack) in the target space.
        """
        if self.targets == "explicit":
            return [tuple(_as_fraction(c) for c in z) for z in self.target_lists[k]]
        m = self.mats[k]
        n = len(m)
        pad = self.taus[k] / 4 + 1
        corners = []
        for idx in range(2 ** n):
            pt = [hull[j][1] if (idx >> j) & 1 else hull[j][0] for j in range(n)]
            corners.append(pt)
        ranges = []
        for i in range(n):
            vals = [sum(m[i][j] * c[j] for j in range(n)) for c in corners]
            ranges.append(range((min(vals) - pad).__ceil__(),
                                (max(vals) + pad).__floor__() + 1))
        out = []
        total = 1
        for r in ranges:
            total *= max(0, len(r))
        if total > self.budget:
            raise EnumerationBudgetExceeded(self.budget, "toral lattice window too large")
        def rec(i, acc):
            if i == n:
                out.append(tuple(Fraction(v) for v in acc))
                return
            for v in ranges[i]:
                rec(i + 1, acc + [v])
        rec(0, [])
        return out

    def piece(self, k: int, z: Tuple[Fraction, ...]) -> HyperplanePiece:
        j = self._axis[k]
        center = self._mat_inv_apply(k, z)
        n = self.dim
        normal = tuple(Fraction(1) if i == j else Fraction(0) for i in range(n))
        # bbox: M^-1 B(z, tau/4) fits in the box of half-width tau/(4 sqrt(d_i))
        hws = []
        for i in range(n):
            d = self._colnorm2[k][i]
            hw = Exact.rat_pow(d, Fraction(-1, 2)) * (self.taus[k] / 4)
            hws.append(hw)
        return HyperplanePiece(normal=normal, offset=center[j], center=center,
                               halfwidths=tuple(hws))

    def members(self, hull, hi_size: SizeLike, lo_size: Optional[SizeLike] = None,
                budget: Optional[int] = None) -> List[Member]:
        i_hi = self.relevant_index(hi_size)
        if i_hi is None:
            return []
        i_lo = self.relevant_index(lo_size) if lo_size is not None else None
        out: List[Member] = []
        for pos in range(1, i_hi + 1):
            if i_lo is not None and pos <= i_lo:
                continue
            k = self.order[pos - 1]
            for z in self._targets_near(k, hull):
                out.append(Member(size=self.sizes[pos - 1], piece=self.piece(k, z)))
        return out


class ExplicitFamily:
    """Hand-built family for fixtures: explicit (size, member list) levels."""

    kind = "explicit"

    def __init__(self, levels: Sequence[Tuple[SizeLike, Sequence[Tuple[Rat, ...]]]]):
        self.levels = [(_as_logval(s), [tuple(_as_fraction(c) for c in pt) for pt in pts])
                       for s, pts in levels]
        self.min_index = 1

    def size_of(self, i: int) -> LogVal:
        return self.levels[i - 1][0]

    def relevant_index(self, t: SizeLike) -> Optional[int]:
        t = _as_logval(t)
        best = None
        for i, (s, _) in enumerate(self.levels, start=1):
            if s.cmp(t) <= 0:
                best = i
        return best

    def members(self, hull, hi_size: SizeLike, lo_size: Optional[SizeLike] = None,
                budget: Optional[int] = None) -> List[Member]:
        i_hi = self.relevant_index(hi_size)
        if i_hi is None:
            return []
        i_lo = self.relevant_index(lo_size) if lo_size is not None else None
        seen = {}
        for i in range(1, i_hi + 1):
            for pt in self.levels[i - 1][1]:
                if _point_in_hull(pt, hull) and pt not in seen:
                    seen[pt] = i
        out = []
        for pt, i in seen.items():
            if i_lo is not None and i <= i_lo:
                continue
            out.append(Member(size=self.levels[i - 1][0], point=pt))
        return sorted(out, key=lambda m: m.point)


Family = Union[RationalFamily, HoroballFamily, PeriodicWordFamily, ToralFamily,
               ExplicitFamily]


# --------------------------------------------------------------------------
# Module-level operations
# --------------------------------------------------------------------------

def relevant(family: Family, t: SizeLike) -> Optional[int]:
    """Maximal index with size <= t; None below the smallest size."""
    return family.relevant_index(t)


def window_members(family: Family, region, t: SizeLike, b: SizeLike,
                   budget: Optional[int] = None) -> List[Member]:
    """Members of R(t) - R(t-b) meeting the region."""
    t = _as_logval(t)
    b = _as_logval(b)
    hull_or_word = _query_of(region)
    return family.members(hull_or_word, t, lo_size=t - b, budget=budget)


def members_up_to(family: Family, region, t: SizeLike,
                  budget: Optional[int] = None) -> List[Member]:
    """Members of the full relevant set R(t) meeting the region."""
    return family.members(_query_of(region), _as_logval(t), budget=budget)


def _query_of(region):
    if isinstance(region, Cylinder):
        return region.word
    if isinstance(region, Box):
        return region.rational_hull()
    return region  # already a rational hull


def simplex_hyperplane(region: Box, k: int, n: int,
                       weights: Optional[Sequence[Rat]] = None,
                       family: Optional[RationalFamily] = None):
    """Affine hyperplane containing R_k inside a small-volume box, or None.

    Requires vol(region) < 1/(n! k^(n+1)), certified with outward rounding.
    """
    vol = Exact.one()
    for lo, hi in region.axes:
        vol = vol * (hi - lo)
    bound = Fraction(1, math.factorial(n) * k ** (n + 1))
    if not vol.cmp(Exact.of(bound)) < 0:
        raise VolumeTooLarge(f"box volume not provably below {bound}")
    fam = family or RationalFamily(n)
    hull = region.rational_hull()
    pts = [m.point for m in fam.members(hull, LogVal.log(k))]
    pts = [p for p in pts if _point_in_hull(p, hull)]
    if not pts:
        return None
    # exact affine hull; the volume bound forces rank <= n-1
    base = pts[0]
    rows = [[c - b for c, b in zip(p, base)] for p in pts[1:]]
    basis = _row_reduce(rows)
    if len(basis) >= n:
        raise AssertionError("volume bound violated: members span the space")
    normal = _orthogonal_complement_vector(basis, n)
    offset = sum(a * c for a, c in zip(normal, base))
    return tuple(normal), offset


def _row_reduce(rows: List[List[Fraction]]) -> List[List[Fraction]]:
    basis: List[List[Fraction]] = []
    for row in rows:
        r = list(row)
        for b in basis:
            piv = next(i for i, x in enumerate(b) if x != 0)
            if r[piv] != 0:
                f = r[piv] / b[piv]
                r = [x - f * y for x, y in zip(r, b)]
        if any(x != 0 for x in r):
            basis.append(r)
    return basis


def _orthogonal_complement_vector(basis: List[List[Fraction]], n: int) -> List[Fraction]:
    """Deterministic rational vector orthogonal to every basis row."""
    for axis in range(n):
        cand = [Fraction(1) if i == axis else Fraction(0) for i in range(n)]
        v = cand[:]
        for b in basis:
            dot_bb = sum(x * x for x in b)
            dot_vb = sum(x * y for x, y in zip(v, b))
            if dot_vb:
                v = [x - dot_vb / dot_bb * y for x, y in zip(v, b)]
        if any(x != 0 for x in v):
            scale = next(x for x in v if x != 0)
            v = [x / scale for x in v]
            den = 1
            for x in v:
                den = den * x.denominator // math.gcd(den, x.denominator)
            return [x * den for x in v]
    raise AssertionError("no orthogonal direction found")


def toral_window_bound_check(family: ToralFamily, t: SizeLike, b: SizeLike):
    """Count indices with log(t_k/tau_k) in (t-b, t]; compare against phi(b)."""
    t = _as_logval(t)
    b = _as_logval(b)
    count = 0
    for k in range(family.K):
        le = family.log_expansion(k) - LogVal.log(family.taus[k].numerator) \
            + LogVal.log(family.taus[k].denominator)
        if le.cmp(t) <= 0 and le.cmp(t - b) > 0:
            count += 1
    kind, par = family.phi
    if kind == "lacunary":
        # phi(b) = b / log(lambda): count <= phi(b) iff count*log(lambda) <= b
        ok = LogVal.log(par.numerator).scale(count).cmp(
            b + LogVal.log(par.denominator).scale(count)) <= 0
    elif kind == "exp":
        ok = Exact.of(count).cmp(Exact.exp(b.scale(par))) <= 0
    else:
        raise ValueError(f"unknown phi kind {kind!r}")
    return count, ok


def audit_nested_discrete(family: Family, horizon: SizeLike, region) -> dict:
    """Check (nestedness, discreteness) on enumerated members below a horizon."""
    horizon = _as_logval(horizon)
    sizes = []
    i = family.min_index
    while True:
        try:
            s = family.size_of(i)
        except (ValueError, IndexError):
            break
        if s.cmp(horizon) > 0:
            break
        sizes.append((i, s))
        i += 1
        if len(sizes) > 100_000:
            raise DiscretenessViolation("size list below horizon is not finite")
    for (i1, s1), (i2, s2) in zip(sizes, sizes[1:]):
        if s1.cmp(s2) > 0:
            raise DiscretenessViolation(f"sizes out of order at indices {i1},{i2}")
    query = _query_of(region)
    prev_keys = set()
    prev_size = None
    for i, s in sizes:
        cur = {m.key() for m in family.members(query, s)}
        missing = prev_keys - cur
        if missing:
            raise NestednessViolation(
                f"members at size {prev_size!r} missing at size {s!r}: {sorted(missing)[:3]}")
        prev_keys, prev_size = cur, s
    return {"sizes_checked": len(sizes), "nested": True, "discrete": True}


def separation_check(family: Family, sigma: Rat, cbar: Rat, horizon: SizeLike,
                     region) -> bool:
    """Pairwise d(x,y) > cbar * e^(-sigma s) inside each relevant set."""
    sigma = _as_fraction(sigma)
    cbar = _as_fraction(cbar)
    horizon = _as_logval(horizon)
    query = _query_of(region)
    i = family.relevant_index(horizon)
    if i is None:
        return True
    members = family.members(query, horizon)
    if members and members[0].word is not None:
        return _separation_words(family, members, sigma, cbar, horizon)
    # group by size level: R_s contains every member of size <= s
    all_sizes = []
    idx = family.min_index
    while True:
        try:
            s = family.size_of(idx)
        except (ValueError, IndexError):
            break
        if s.cmp(horizon) > 0:
            break
        all_sizes.append(s)
        idx += 1
    for s in all_sizes:
        pts = [m.point for m in members if m.size.cmp(s) <= 0]
        thresh = Exact.exp(s.scale(-sigma)) * cbar
        for a in range(len(pts)):
            for b in range(a + 1, len(pts)):
                dist = max(abs(x - y) for x, y in zip(pts[a], pts[b]))
                if Exact.of(dist).cmp(thresh) <= 0:
                    raise SeparationViolation(
                        f"{pts[a]} and {pts[b]} at size {s!r}: distance {dist}")
    return True


def _separation_words(family, members, sigma, cbar, horizon) -> bool:
    if sigma != 1 or cbar > 1:
        raise ValueError("word separation is checked for sigma = 1, cbar <= 1")
    # distinct members of R_m must disagree within the first (size) symbols
    all_sizes = []
    idx = family.min_index
    while True:
        try:
            s = family.size_of(idx)
        except (ValueError, IndexError):
            break
        if s.cmp(horizon) > 0:
            break
        all_sizes.append(s)
        idx += 1
    for s in all_sizes:
        depth = int(s.is_rational())
        words = [m.word for m in members if m.size.cmp(s) <= 0]
        seen = {}
        for w in words:
            pref = w.prefix(depth)
            if pref in seen and seen[pref] != (w.head, w.period):
                raise SeparationViolation(
                    f"words {seen[pref]} and {(w.head, w.period)} agree to depth {depth}")
            seen[pref] = (w.head, w.period)
    return True
