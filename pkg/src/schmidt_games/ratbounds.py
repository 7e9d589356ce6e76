"""Pure-rational certified bounds for exp and log.

This is the independent oracle the test suite uses to cross-check the
interval backend behind the geometric predicates.  Everything here is
Fraction arithmetic with explicit truncation-error bounds; mpmath is
deliberately not imported.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Tuple


@lru_cache(maxsize=None)
def _e_bounds(bits: int) -> Tuple[Fraction, Fraction]:
    """Enclosure of e with error < 2^-bits."""
    n, fact, acc = 1, 1, Fraction(2)  # 1/0! + 1/1!
    while True:
        n += 1
        fact *= n
        acc += Fraction(1, fact)
        # remainder of sum_{i>n} 1/i! is < 2/(n+1)!
        if Fraction(2, fact * (n + 1)) < Fraction(1, 2 ** bits):
            return acc, acc + Fraction(2, fact * (n + 1))


def _exp_frac_bounds(f: Fraction, bits: int) -> Tuple[Fraction, Fraction]:
    """Enclosure of e^f for 0 <= f <= 1/4."""
    assert 0 <= f <= Fraction(1, 4)
    term = Fraction(1)
    acc = Fraction(1)
    n = 0
    while True:
        n += 1
        term *= f / n
        acc += term
        # tail < term * f/(n+1) * 1/(1 - f) <= term * (1/3)
        tail = term / 3
        if tail < Fraction(1, 2 ** (bits + 2)):
            return acc, acc + tail


def exp_bounds(x: Fraction, bits: int = 128) -> Tuple[Fraction, Fraction]:
    """Certified enclosure of e^x with relative error < 2^-bits."""
    x = Fraction(x)
    if x < 0:
        lo, hi = exp_bounds(-x, bits + 2)
        return 1 / hi, 1 / lo
    m = x.numerator // x.denominator
    r = x - m
    work = bits + 8
    elo, ehi = _e_bounds(work)
    plo, phi = elo ** m, ehi ** m
    # halve r twice so the Taylor tail is geometric with ratio <= 1/3
    qlo, qhi = _exp_frac_bounds(r / 4, work)
    for _ in range(2):
        qlo, qhi = qlo * qlo, qhi * qhi
    return plo * qlo, phi * qhi


@lru_cache(maxsize=None)
def _atanh_bounds(num: int, den: int, bits: int) -> Tuple[Fraction, Fraction]:
    """Enclosure of atanh(num/den) for 0 < num/den <= 1/3."""
    u = Fraction(num, den)
    u2 = u * u
    term = u
    acc = u
    k = 0
    while True:
        k += 1
        term *= u2
        acc += term / (2 * k + 1)
        tail = term * u2 / ((2 * k + 3) * (1 - u2))
        if tail < Fraction(1, 2 ** (bits + 2)):
            return acc, acc + tail


def log_bounds(y: Fraction, bits: int = 128) -> Tuple[Fraction, Fraction]:
    """Certified enclosure of log(y) for rational y > 0."""
    y = Fraction(y)
    if y <= 0:
        raise ValueError("log of non-positive rational")
    if y < 1:
        lo, hi = log_bounds(1 / y, bits)
        return -hi, -lo
    # scale into [1, 2): log y = k log 2 + log z
    k = 0
    z = y
    while z >= 2:
        z /= 2
        k += 1
    l2lo, l2hi = _atanh_bounds(1, 3, bits + 4)  # log 2 = 2 atanh(1/3)
    l2lo, l2hi = 2 * l2lo, 2 * l2hi
    u = (z - 1) / (z + 1)  # in [0, 1/3)
    if u == 0:
        zlo = zhi = Fraction(0)
    else:
        alo, ahi = _atanh_bounds(u.numerator, u.denominator, bits + 4)
        zlo, zhi = 2 * alo, 2 * ahi
    return k * l2lo + zlo, k * l2hi + zhi


def pow_bounds(base: Fraction, w: Fraction, bits: int = 128) -> Tuple[Fraction, Fraction]:
    """Certified enclosure of base^w for rational base > 0."""
    base, w = Fraction(base), Fraction(w)
    if w.denominator == 1:
        v = base ** w
        return v, v
    llo, lhi = log_bounds(base, bits + 4)
    x = w * llo, w * lhi
    xlo, xhi = min(x), max(x)
    return exp_bounds(xlo, bits + 4)[0], exp_bounds(xhi, bits + 4)[1]


def oracle_sign(terms, bits: int = 128) -> int:
    """Sign of sum c * e^q * prod m^w, or 0 when the enclosure straddles zero.

    `terms` iterates over ((q, pows), coeff) exactly as stored by Exact.
    A 0 answer means "undecided at this precision", never "provably zero";
    callers escalate or treat it as disagreement-free.
    """
    lo = hi = Fraction(0)
    for (q, pows), c in terms:
        alo, ahi = exp_bounds(q, bits)
        for m, w in pows:
            plo, phi = pow_bounds(Fraction(m), w, bits)
            alo, ahi = alo * plo, ahi * phi
        if c >= 0:
            lo += c * alo
            hi += c * ahi
        else:
            lo += c * ahi
            hi += c * alo
    if lo > 0:
        return 1
    if hi < 0:
        return -1
    return 0
