"""Exact measure computations on region realizations.

Lebesgue masses of boxes, uniform Bernoulli masses of cylinders and the
coin-flipping measure of the middle-thirds Cantor set restricted to an
interval are all computed exactly; only where an obstacle has irrational
(symbolic) endpoints does the caller fall back to certified enclosures.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional, Tuple

from .exactnum import Exact, LogVal, _as_fraction
from .geometry import Box, Cylinder, Region
from .strategy import MeasureSpec, PowerLaw


def box_volume(box: Box) -> Exact:
    v = Exact.one()
    for lo, hi in box.axes:
        v = v * (hi - lo)
    return v


def cylinder_mass(cyl: Cylinder) -> Fraction:
    return Fraction(1, cyl.alphabet ** cyl.depth)


def cantor_interval_mass(lo: Fraction, hi: Fraction,
                         max_depth: int = 400) -> Fraction:
    """Coin-flipping measure of [lo, hi] on the middle-thirds Cantor set.

    Recursive descent over cells; exact because every fully-covered cell
    contributes 2^-depth and cells narrower than the interval resolution
    are always fully in or out after finitely many splits.
    """
    lo, hi = _as_fraction(lo), _as_fraction(hi)

    def rec(a: Fraction, b: Fraction, mass: Fraction, depth: int) -> Fraction:
        if b <= lo or a >= hi:
            return Fraction(0)  # disjoint or boundary touch: atomless measure
        if lo <= a and b <= hi:
            return mass
        if depth > max_depth:
            raise RecursionError("cantor mass did not resolve; widen the interval")
        third = (b - a) / 3
        return rec(a, a + third, mass / 2, depth + 1) + \
            rec(b - third, b, mass / 2, depth + 1)

    if hi < 0 or lo > 1:
        return Fraction(0)
    return rec(Fraction(0), Fraction(1), Fraction(1), 0)


def region_mass(measure: MeasureSpec, region: Region,
                bits: int = 128) -> Tuple[Fraction, Fraction]:
    """Certified (lower, upper) rational bounds on the region's mass."""
    if measure.kind == "shift_uniform":
        m = cylinder_mass(region)
        return m, m
    if measure.kind == "lebesgue":
        return box_volume(region).bounds(bits)
    if measure.kind == "cantor":
        (lo, hi), = region.axes
        r = lo.is_rational()
        s = hi.is_rational()
        if r is not None and s is not None:
            m = cantor_interval_mass(r, s)
            return m, m
        lo_out, hi_out = lo.lower_rational(bits), hi.upper_rational(bits)
        lo_in, hi_in = lo.upper_rational(bits), hi.lower_rational(bits)
        return cantor_interval_mass(lo_in, hi_in), cantor_interval_mass(lo_out, hi_out)
    if measure.kind == "product":
        lo = hi = Fraction(1)
        start = 0
        for f in measure.factors:
            d = f.support.dim
            sub = Box(region.axes[start:start + d])
            l, h = region_mass(f, sub, bits)
            lo *= l
            hi *= h
            start += d
        return lo, hi
    raise ValueError(f"unknown measure kind {measure.kind!r}")


def power_law_envelope(pl: PowerLaw, t, which: str) -> Exact:
    """c * e^(-tau t) for the declared tau; `which` picks c1 or c2.

    For ratio exponents (tau = log a / log b) the envelope is not in the
    exact value class; callers use `power_law_envelope_bounds` instead.
    """
    c = pl.c1 if which == "lo" else pl.c2
    if pl.tau_kind == "rational":
        u = LogVal(-_as_fraction(pl.tau_param) * _as_fraction(t))
        return Exact.exp(u) * c
    if pl.tau_kind == "log":
        # e^(-t log m) = m^-t
        return Exact.rat_pow(Fraction(int(pl.tau_param)), -_as_fraction(t)) * c
    raise ValueError("use power_law_envelope_bounds for ratio exponents")


def power_law_envelope_bounds(pl: PowerLaw, t, bits: int = 192) -> Tuple[
        Tuple[Fraction, Fraction], Tuple[Fraction, Fraction]]:
    """((lo_lo, lo_hi), (hi_lo, hi_hi)) enclosures of c1 e^-tau t, c2 e^-tau t."""
    from mpmath import iv
    from .exactnum import _iv_lock, _interval_to_fractions
    t = _as_fraction(t)
    if pl.tau_kind != "logratio":
        e = power_law_envelope(pl, t, "lo").bounds(bits)
        f = power_law_envelope(pl, t, "hi").bounds(bits)
        return e, f
    a, b = pl.tau_param
    with _iv_lock:
        saved = iv.prec
        try:
            iv.prec = bits
            tau = iv.log(iv.mpf(int(a))) / iv.log(iv.mpf(int(b)))
            env = iv.exp(-tau * iv.mpf(t.numerator) / t.denominator)
            lo_env, hi_env = _interval_to_fractions(env)
        finally:
            iv.prec = saved
    return ((pl.c1 * lo_env, pl.c1 * hi_env), (pl.c2 * lo_env, pl.c2 * hi_env))
