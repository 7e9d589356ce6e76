"""Parameter spaces, monotonic psi-functions and sound geometric predicates.

Euclidean supports use max-metric boxes throughout: the standard function of
scale sigma assigns to a formal ball (x, t) the box with per-axis half-width
e^(-sigma t); the weighted function uses per-axis exponents (1 + r_i).  Shift
supports use cylinders: psi((w, t)) is the depth-t cylinder of w.

Predicates are tri-state.  "yes"/"no" are only returned when certified by
exact symbolic comparison (see exactnum); everything else is "unknown",
which callers must treat as a rejection.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Optional, Sequence, Tuple, Union

from .errors import (
    HeightBelowFloor,
    IndeterminatePredicate,
    MixedSupports,
    UnsupportedObstacle,
)
from .exactnum import Exact, LogVal, Rat, _as_fraction


class Tri(Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"


NEG_INF = None  # t_floor sentinel for "-infinity"


# --------------------------------------------------------------------------
# Specs, points, balls
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PsiSpec:
    """Shape of the monotonic function: which compact set a formal ball means."""

    kind: str  # "standard" | "weighted" | "shift"
    dim: int = 1
    sigma: Optional[Fraction] = None          # standard
    weights: Optional[Tuple[Fraction, ...]] = None  # weighted
    alphabet: Optional[int] = None            # shift
    t_floor: Optional[Fraction] = None        # None means -infinity

    def __post_init__(self):
        if self.kind == "standard":
            if self.sigma is None or self.sigma <= 0:
                raise ValueError("standard spec needs sigma > 0")
        elif self.kind == "weighted":
            w = self.weights
            if not w or any(x < 0 for x in w) or sum(w) != 1:
                raise ValueError("weights must be nonnegative and sum to 1")
            object.__setattr__(self, "dim", len(w))
        elif self.kind == "shift":
            if not self.alphabet or self.alphabet < 2:
                raise ValueError("shift spec needs alphabet size >= 2")
            if self.t_floor is None:
                object.__setattr__(self, "t_floor", Fraction(-1))
        else:
            raise ValueError(f"unknown psi kind {self.kind!r}")

    def axis_exponents(self) -> Tuple[Fraction, ...]:
        if self.kind == "standard":
            return (self.sigma,) * self.dim
        if self.kind == "weighted":
            return tuple(1 + r for r in self.weights)
        raise MixedSupports("shift specs have no Euclidean axes")

    def min_exponent(self) -> Fraction:
        return min(self.axis_exponents())

    def radius(self, axis: int, t: Rat) -> Exact:
        """Half-width e^(-exponent * t) along one axis."""
        u = self.axis_exponents()[axis] * _as_fraction(t)
        return Exact.exp(LogVal(-u))

    def check_height(self, t: Rat) -> None:
        t = _as_fraction(t)
        if self.t_floor is not None and t <= self.t_floor:
            raise HeightBelowFloor(f"t = {t} <= floor {self.t_floor}")


def standard_spec(sigma: Rat, dim: int = 1, t_floor=None) -> PsiSpec:
    return PsiSpec("standard", dim=dim, sigma=_as_fraction(sigma), t_floor=t_floor)


def weighted_spec(weights: Sequence[Rat], t_floor=Fraction(0)) -> PsiSpec:
    return PsiSpec("weighted", weights=tuple(_as_fraction(w) for w in weights),
                   t_floor=t_floor)


def shift_spec(alphabet: int) -> PsiSpec:
    return PsiSpec("shift", alphabet=alphabet)


@dataclass(frozen=True)
class Point:
    """Euclidean point (exact rational coords) or finite word (cylinder base)."""

    coords: Optional[Tuple[Fraction, ...]] = None
    word: Optional[Tuple[int, ...]] = None

    @staticmethod
    def euclidean(*coords: Rat) -> "Point":
        return Point(coords=tuple(_as_fraction(c) for c in coords))

    @staticmethod
    def of_word(symbols: Sequence[int]) -> "Point":
        return Point(word=tuple(symbols))


@dataclass(frozen=True)
class FormalBall:
    center: Point
    t: Fraction

    def __post_init__(self):
        object.__setattr__(self, "t", _as_fraction(self.t))
        if self.center.word is not None:
            if self.t.denominator != 1 or self.t < 0:
                raise ValueError("shift heights are nonnegative integers")

    def lift(self, db: Rat) -> "FormalBall":
        return FormalBall(self.center, self.t + _as_fraction(db))


@dataclass(frozen=True)
class WordPoint:
    """Eventually periodic word: head then an infinitely repeated period."""

    head: Tuple[int, ...]
    period: Optional[Tuple[int, ...]] = None

    def prefix(self, n: int) -> Tuple[int, ...]:
        if n <= len(self.head):
            return self.head[:n]
        if not self.period:
            raise UnsupportedObstacle(f"finite word too short for depth {n}")
        out = list(self.head)
        i = 0
        while len(out) < n:
            out.append(self.period[i % len(self.period)])
            i += 1
        return tuple(out)


# --------------------------------------------------------------------------
# Regions
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Box:
    """Product of closed intervals with symbolic endpoints."""

    axes: Tuple[Tuple[Exact, Exact], ...]
    ball: Optional[FormalBall] = field(default=None, compare=False)
    spec: Optional[PsiSpec] = field(default=None, compare=False)

    @property
    def dim(self) -> int:
        return len(self.axes)

    def inflate(self, pads: Sequence[Exact]) -> "Box":
        return Box(tuple((lo - p, hi + p) for (lo, hi), p in zip(self.axes, pads)))

    def rational_hull(self, bits: int = 128) -> Tuple[Tuple[Fraction, Fraction], ...]:
        """Outward-rounded rational endpoints (lo down, hi up)."""
        return tuple((lo.lower_rational(bits), hi.upper_rational(bits))
                     for lo, hi in self.axes)

    def approx(self) -> Tuple[Tuple[float, float], ...]:
        return tuple((lo.approx(), hi.approx()) for lo, hi in self.axes)


@dataclass(frozen=True)
class Cylinder:
    word: Tuple[int, ...]
    alphabet: int
    ball: Optional[FormalBall] = field(default=None, compare=False)

    @property
    def depth(self) -> int:
        return len(self.word)


@dataclass(frozen=True)
class Slab:
    """{x : |<normal, x> - offset| <= halfwidth}, optionally clipped to a box."""

    normal: Tuple[Fraction, ...]
    offset: Fraction
    halfwidth: Exact
    bbox: Optional[Box] = None


Region = Union[Box, Cylinder]
Piece = Union[Box, Cylinder, Slab]


def rational_box(intervals: Sequence[Tuple[Rat, Rat]]) -> Box:
    return Box(tuple((Exact.of(lo), Exact.of(hi)) for lo, hi in intervals))


# --------------------------------------------------------------------------
# psi evaluation
# --------------------------------------------------------------------------

def psi_eval(spec: PsiSpec, ball: FormalBall) -> Region:
    """Outward realization of psi(ball); exact cylinders on shift supports."""
    spec.check_height(ball.t)
    if spec.kind == "shift":
        word = ball.center.word
        if word is None:
            raise MixedSupports("shift spec needs a word center")
        depth = int(ball.t)
        if len(word) < depth:
            raise ValueError(f"word of length {len(word)} cannot open depth {depth}")
        return Cylinder(word[:depth], spec.alphabet, ball=ball)
    coords = ball.center.coords
    if coords is None:
        raise MixedSupports("Euclidean spec needs coordinate center")
    if len(coords) != spec.dim:
        raise ValueError("dimension mismatch")
    axes = []
    for i, c in enumerate(coords):
        rad = spec.radius(i, ball.t)
        ce = Exact.of(c)
        axes.append((ce - rad, ce + rad))
    return Box(tuple(axes), ball=ball, spec=spec)


# --------------------------------------------------------------------------
# Predicates
# --------------------------------------------------------------------------

def _cmp_tri(a: Exact, b: Exact):
    """Certified comparison; None when precision is exhausted."""
    try:
        return a.cmp(b)
    except IndeterminatePredicate:
        return None


def contains(outer: Piece, inner: Piece) -> Tri:
    if isinstance(outer, Cylinder) and isinstance(inner, Cylinder):
        if outer.alphabet != inner.alphabet:
            raise MixedSupports("cylinders over different alphabets")
        if inner.word[: outer.depth] == outer.word:
            return Tri.YES
        return Tri.NO
    if isinstance(outer, Box) and isinstance(inner, Box):
        if outer.dim != inner.dim:
            raise MixedSupports("boxes of different dimension")
        verdict = Tri.YES
        for (olo, ohi), (ilo, ihi) in zip(outer.axes, inner.axes):
            c1 = _cmp_tri(olo, ilo)
            c2 = _cmp_tri(ihi, ohi)
            if (c1 is not None and c1 > 0) or (c2 is not None and c2 > 0):
                return Tri.NO
            if c1 is None or c2 is None:
                verdict = Tri.UNKNOWN
        return verdict
    raise MixedSupports(
        f"containment undefined for {type(outer).__name__}/{type(inner).__name__}")


def _box_projection(box: Box, normal: Sequence[Fraction]) -> Tuple[Exact, Exact]:
    lo = Exact.zero()
    hi = Exact.zero()
    for a, (xlo, xhi) in zip(normal, box.axes):
        if a >= 0:
            lo = lo + xlo * a
            hi = hi + xhi * a
        else:
            lo = lo + xhi * a
            hi = hi + xlo * a
    return lo, hi


def _disjoint_box_slab(box: Box, slab: Slab) -> Tri:
    plo, phi = _box_projection(box, slab.normal)
    upper = Exact.of(slab.offset) + slab.halfwidth
    lower = Exact.of(slab.offset) - slab.halfwidth
    c1 = _cmp_tri(plo, upper)   # > 0 means box entirely above the slab
    c2 = _cmp_tri(phi, lower)   # < 0 means box entirely below
    if (c1 is not None and c1 > 0) or (c2 is not None and c2 < 0):
        return Tri.YES
    if c1 is not None and c2 is not None and c1 <= 0 and c2 >= 0:
        return Tri.NO  # projection interval meets the slab band
    return Tri.UNKNOWN


def disjoint(a: Piece, b: Piece) -> Tri:
    if isinstance(a, Cylinder) and isinstance(b, Cylinder):
        if a.alphabet != b.alphabet:
            raise MixedSupports("cylinders over different alphabets")
        k = min(a.depth, b.depth)
        return Tri.NO if a.word[:k] == b.word[:k] else Tri.YES
    if isinstance(a, Box) and isinstance(b, Box):
        if a.dim != b.dim:
            raise MixedSupports("boxes of different dimension")
        verdict = Tri.NO
        for (alo, ahi), (blo, bhi) in zip(a.axes, b.axes):
            c1 = _cmp_tri(ahi, blo)
            c2 = _cmp_tri(bhi, alo)
            if (c1 is not None and c1 < 0) or (c2 is not None and c2 < 0):
                return Tri.YES  # strict gap on this axis
            if c1 is None or c2 is None:
                verdict = Tri.UNKNOWN
        return verdict
    if isinstance(a, Slab) or isinstance(b, Slab):
        box, slab = (a, b) if isinstance(b, Slab) else (b, a)
        if not isinstance(box, Box):
            raise MixedSupports("slab predicates need a box on the other side")
        base = _disjoint_box_slab(box, slab)
        if slab.bbox is None:
            return base
        if base is Tri.YES:
            return Tri.YES
        bb = disjoint(box, slab.bbox)
        if bb is Tri.YES:
            return Tri.YES
        if base is Tri.NO and bb is Tri.NO and _axis_aligned(slab):
            # axis-aligned clipped slab is exactly a box, so overlap is certain
            return Tri.NO
        return Tri.UNKNOWN
    raise MixedSupports(
        f"disjointness undefined for {type(a).__name__}/{type(b).__name__}")


def _axis_aligned(slab: Slab) -> bool:
    return sum(1 for a in slab.normal if a != 0) == 1


def disjoint_from_all(region: Piece, pieces: Sequence[Piece]) -> Tri:
    verdict = Tri.YES
    for p in pieces:
        d = disjoint(region, p)
        if d is Tri.NO:
            return Tri.NO
        if d is Tri.UNKNOWN:
            verdict = Tri.UNKNOWN
    return verdict


# --------------------------------------------------------------------------
# Neighborhoods of obstacles
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ObstacleDescriptor:
    """Finite point list, a hyperplane, or a word list."""

    kind: str  # "points" | "hyperplane" | "words"
    points: Optional[Tuple[Tuple[Fraction, ...], ...]] = None
    normal: Optional[Tuple[Fraction, ...]] = None
    offset: Optional[Fraction] = None
    words: Optional[Tuple[WordPoint, ...]] = None


def neighborhood(spec: PsiSpec, obstacle: ObstacleDescriptor, t: Rat) -> Tuple[Piece, ...]:
    """Realize the union of psi-balls around the obstacle at height t."""
    spec.check_height(t)
    t = _as_fraction(t)
    if obstacle.kind == "points":
        out = []
        for pt in obstacle.points:
            axes = []
            for i, c in enumerate(pt):
                rad = spec.radius(i, t)
                ce = Exact.of(c)
                axes.append((ce - rad, ce + rad))
            out.append(Box(tuple(axes)))
        return tuple(out)
    if obstacle.kind == "hyperplane":
        if spec.kind == "shift":
            raise UnsupportedObstacle("hyperplanes have no shift realization")
        width = Exact.zero()
        for i, a in enumerate(obstacle.normal):
            if a:
                width = width + spec.radius(i, t) * abs(a)
        return (Slab(obstacle.normal, obstacle.offset, width),)
    if obstacle.kind == "words":
        if spec.kind != "shift":
            raise UnsupportedObstacle("word obstacles need a shift spec")
        depth = int(t)
        return tuple(Cylinder(w.prefix(depth), spec.alphabet) for w in obstacle.words)
    raise UnsupportedObstacle(f"no realization rule for {obstacle.kind!r}")


# --------------------------------------------------------------------------
# Ambient supports
# --------------------------------------------------------------------------

def cantor_contains(x: Fraction) -> bool:
    """Membership in the middle-thirds Cantor set, exact for rationals."""
    x = _as_fraction(x)
    if x < 0 or x > 1:
        return False
    seen = set()
    while True:
        if x == 0 or x == 1:
            return True
        if x in seen:
            return True  # periodic ternary tail avoiding the middle third
        seen.add(x)
        if x < Fraction(1, 3):
            x *= 3
        elif x > Fraction(2, 3):
            x = 3 * x - 2
        elif x == Fraction(1, 3) or x == Fraction(2, 3):
            return True  # endpoint: one of its expansions avoids digit 1
        else:
            return False


def cantor_cells(lo: Fraction, hi: Fraction, depth: int):
    """Depth-`depth` Cantor cells [a, b] intersecting [lo, hi], ascending."""
    out = []

    def rec(a: Fraction, b: Fraction, d: int):
        if b < lo or a > hi:
            return
        if d == 0:
            out.append((a, b))
            return
        third = (b - a) / 3
        rec(a, a + third, d - 1)
        rec(b - third, b, d - 1)

    rec(Fraction(0), Fraction(1), depth)
    return out


@dataclass(frozen=True)
class AmbientSupport:
    """Closed ambient set X the game lives on, with exact membership."""

    kind: str  # "euclidean" | "cantor" | "shift" | "product"
    dim: int = 1
    alphabet: Optional[int] = None
    factors: Optional[Tuple["AmbientSupport", ...]] = None

    def contains_point(self, p: Point) -> bool:
        if self.kind == "euclidean":
            return p.coords is not None and len(p.coords) == self.dim
        if self.kind == "cantor":
            return (p.coords is not None and len(p.coords) == 1
                    and cantor_contains(p.coords[0]))
        if self.kind == "shift":
            return (p.word is not None
                    and all(0 <= s < self.alphabet for s in p.word))
        if self.kind == "product":
            if p.coords is None:
                return False
            i = 0
            for f in self.factors:
                sub = Point(coords=p.coords[i:i + f.dim])
                if not f.contains_point(sub):
                    return False
                i += f.dim
            return i == len(p.coords)
        raise ValueError(f"unknown support kind {self.kind!r}")


def euclidean_support(dim: int) -> AmbientSupport:
    return AmbientSupport("euclidean", dim=dim)


def cantor_support() -> AmbientSupport:
    return AmbientSupport("cantor", dim=1)


def shift_support(alphabet: int) -> AmbientSupport:
    return AmbientSupport("shift", dim=1, alphabet=alphabet)


def product_support(*factors: AmbientSupport) -> AmbientSupport:
    return AmbientSupport("product", dim=sum(f.dim for f in factors),
                          factors=tuple(factors))
