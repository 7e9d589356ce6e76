"""Exact arithmetic on values of the form  sum_i  c_i * e^{q_i} * prod_p p^{w_ip}.

All game heights and centers are rational, but the radii they induce
(e^{-sigma t}, k^{-(1+r)} and friends) are not.  This module keeps such
quantities symbolic so that geometric predicates can answer soundly:

* equality is decided by canonical form (exponentials of distinct
  exponents are linearly independent over the rationals, so a canonical
  form is zero iff the value is zero);
* strict signs are certified with directed-rounding interval arithmetic,
  starting at 128 bits and doubling up to 1024 bits before giving up with
  IndeterminatePredicate.

Two value domains appear:

``LogVal``  -- elements of the exponent line, q + sum w_m log(m).
              Heights, sizes and their arithmetic live here.
``Exact``   -- actual real values (radii, coordinates, volumes).

``Exact`` is closed under +, -, * which is all the box/slab geometry needs.
"""

from __future__ import annotations

import threading
from fractions import Fraction
from typing import Iterable, Optional, Tuple, Union

from .errors import IndeterminatePredicate

Rat = Union[Fraction, int]

_PRECISIONS = (128, 256, 512, 1024)

_SMALL_PRIMES = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37]


def _as_fraction(x: Rat) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    import numbers
    if isinstance(x, numbers.Integral):
        return Fraction(int(x))
    if isinstance(x, numbers.Rational):
        return Fraction(int(x.numerator), int(x.denominator))
    raise TypeError(f"expected exact rational, got {type(x).__name__}: {x!r}")


def factorize(n: int, limit: int = 100_000) -> Optional[dict]:
    """Trial-division factorization; None when a cofactor survives `limit`."""
    if n <= 0:
        raise ValueError("factorize expects a positive integer")
    out: dict = {}
    for p in _SMALL_PRIMES:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    p = 41
    while p * p <= n and p <= limit:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 2
    if n > 1:
        if n > limit * limit:
            return None
        out[n] = out.get(n, 0) + 1
    return out


# --------------------------------------------------------------------------
# Interval backend (mpmath), guarded by a lock: contexts are global state.
# --------------------------------------------------------------------------

_iv_lock = threading.Lock()


def _raw_mpf_to_fraction(raw) -> Fraction:
    sign, man, exp, _ = raw
    man, exp = int(man), int(exp)  # gmpy backend hands back mpz
    if man == 0:
        if exp == 0:
            return Fraction(0)
        raise IndeterminatePredicate("non-finite interval endpoint")
    val = Fraction(man)
    if exp >= 0:
        val *= 2 ** exp
    else:
        val /= 2 ** (-exp)
    return -val if sign else val


def _interval_to_fractions(x) -> Tuple[Fraction, Fraction]:
    lo_raw, hi_raw = x._mpi_
    return _raw_mpf_to_fraction(lo_raw), _raw_mpf_to_fraction(hi_raw)


def _exp_atom_bounds(q: Fraction, pows: Tuple[Tuple[int, Fraction], ...],
                     bits: int) -> Tuple[Fraction, Fraction]:
    """Certified rational enclosure of e^q * prod m^w."""
    from mpmath import iv

    with _iv_lock:
        saved = iv.prec
        try:
            iv.prec = bits
            acc = iv.mpf(1)
            if q:
                acc *= iv.exp(iv.mpf(q.numerator) / q.denominator)
            for m, w in pows:
                acc *= iv.exp(iv.log(iv.mpf(m)) * iv.mpf(w.numerator) / w.denominator)
            lo, hi = _interval_to_fractions(acc)
        finally:
            iv.prec = saved
    return lo, hi


_atom_cache: dict = {}


def _atom_bounds_cached(key, bits: int) -> Tuple[Fraction, Fraction]:
    ck = (key, bits)
    hit = _atom_cache.get(ck)
    if hit is None:
        hit = _exp_atom_bounds(key[0], key[1], bits)
        if len(_atom_cache) > 200_000:
            _atom_cache.clear()
        _atom_cache[ck] = hit
    return hit


# --------------------------------------------------------------------------
# Exponent-line values
# --------------------------------------------------------------------------

class LogVal:
    """q + sum_m w_m * log(m)  with q, w rational and m integers >= 2.

    Used for heights, sizes and decay exponents.  Composite bases are kept
    as-is unless a later power needs their prime split; bases are however
    always reduced greedily over a small prime list so that e.g. log 12 and
    2 log 2 + log 3 share a canonical form.
    """

    __slots__ = ("q", "logs")

    def __init__(self, q: Rat = 0, logs: Iterable[Tuple[int, Rat]] = ()):
        self.q = _as_fraction(q)
        acc: dict = {}
        for m, w in logs:
            _accumulate_log(acc, m, _as_fraction(w))
        self.logs = tuple(sorted((m, w) for m, w in acc.items() if w != 0))

    # construction ----------------------------------------------------------
    @staticmethod
    def of(q: Rat) -> "LogVal":
        return LogVal(q)

    @staticmethod
    def log(m: Rat, w: Rat = 1) -> "LogVal":
        """w * log(m) for a positive rational m."""
        m = _as_fraction(m)
        if m <= 0:
            raise ValueError("log of a non-positive rational")
        w = _as_fraction(w)
        return LogVal(0, [(m.numerator, w), (m.denominator, -w)] if m.denominator != 1
                      else [(m.numerator, w)])

    # arithmetic --------------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, LogVal):
            return LogVal(self.q + other.q, self.logs + other.logs)
        return LogVal(self.q + _as_fraction(other), self.logs)

    __radd__ = __add__

    def __neg__(self):
        return LogVal(-self.q, tuple((m, -w) for m, w in self.logs))

    def __sub__(self, other):
        return self + (-(other if isinstance(other, LogVal) else LogVal(other)))

    def __rsub__(self, other):
        return LogVal(other) - self

    def scale(self, c: Rat) -> "LogVal":
        c = _as_fraction(c)
        return LogVal(self.q * c, tuple((m, w * c) for m, w in self.logs))

    # predicates --------------------------------------------------------------
    def is_rational(self) -> Optional[Fraction]:
        return self.q if not self.logs else None

    def sign(self) -> int:
        """Sign of the exponent value; exact via e^self vs 1."""
        if not self.logs:
            return (self.q > 0) - (self.q < 0)
        return Exact.exp(self).cmp(Exact.one())

    def cmp(self, other) -> int:
        return (self - other).sign()

    def __eq__(self, other):
        if not isinstance(other, (LogVal, int, Fraction)):
            return NotImplemented
        other = other if isinstance(other, LogVal) else LogVal(other)
        return self.q == other.q and self.logs == other.logs

    def __hash__(self):
        return hash((self.q, self.logs))

    def __le__(self, other):
        return self.cmp(other if isinstance(other, LogVal) else LogVal(other)) <= 0

    def __lt__(self, other):
        return self.cmp(other if isinstance(other, LogVal) else LogVal(other)) < 0

    def __ge__(self, other):
        return self.cmp(other if isinstance(other, LogVal) else LogVal(other)) >= 0

    def __gt__(self, other):
        return self.cmp(other if isinstance(other, LogVal) else LogVal(other)) > 0

    def bounds(self, bits: int = 128) -> Tuple[Fraction, Fraction]:
        lo = hi = self.q
        for m, w in self.logs:
            llo, lhi = _log_int_bounds(m, bits)
            if w >= 0:
                lo += w * llo
                hi += w * lhi
            else:
                lo += w * lhi
                hi += w * llo
        return lo, hi

    def approx(self) -> float:
        lo, hi = self.bounds(64)
        return float((lo + hi) / 2)

    def __repr__(self):
        parts = [str(self.q)] if self.q or not self.logs else ([str(self.q)] if self.q else [])
        parts += [f"{w}*log({m})" for m, w in self.logs]
        return " + ".join(parts) if parts else "0"


def _accumulate_log(acc: dict, m: int, w: Fraction) -> None:
    if w == 0:
        return
    if not isinstance(m, int) or m <= 0:
        raise ValueError(f"log base must be a positive integer, got {m!r}")
    if m == 1:
        return
    fact = factorize(m)
    if fact is None:
        acc[m] = acc.get(m, 0) + w
        return
    for p, e in fact.items():
        acc[p] = acc.get(p, 0) + w * e


def _log_int_bounds(m: int, bits: int) -> Tuple[Fraction, Fraction]:
    from mpmath import iv

    ck = (("log", m), bits)
    hit = _atom_cache.get(ck)
    if hit is None:
        with _iv_lock:
            saved = iv.prec
            try:
                iv.prec = bits
                hit = _interval_to_fractions(iv.log(iv.mpf(m)))
            finally:
                iv.prec = saved
        _atom_cache[ck] = hit
    return hit


# --------------------------------------------------------------------------
# Real values
# --------------------------------------------------------------------------

def _canonical_term(q: Fraction, logs: Tuple[Tuple[int, Fraction], ...]):
    """Split integer parts of the log-exponents into a rational coefficient.

    Returns (coeff multiplier, key) where key = (q, ((m, frac_w) ...)) with
    every frac_w in (0, 1).  Values with equal keys are rational multiples
    of one another, which is what the zero test needs.
    """
    coeff = Fraction(1)
    pows = []
    for m, w in logs:
        k = w.numerator // w.denominator  # floor
        f = w - k
        if k:
            coeff *= Fraction(m) ** k
        if f:
            pows.append((m, f))
    return coeff, (q, tuple(sorted(pows)))


class Exact:
    """Finite sum of terms c * e^q * prod m^w, canonicalized."""

    __slots__ = ("terms",)

    def __init__(self, terms: Optional[dict] = None):
        self.terms = terms or {}

    # construction ----------------------------------------------------------
    @staticmethod
    def of(x: Rat) -> "Exact":
        x = _as_fraction(x)
        return Exact({(Fraction(0), ()): x} if x else {})

    @staticmethod
    def zero() -> "Exact":
        return Exact({})

    @staticmethod
    def one() -> "Exact":
        return Exact.of(1)

    @staticmethod
    def exp(u: Union[LogVal, Rat]) -> "Exact":
        """e^u for an exponent-line value u."""
        if not isinstance(u, LogVal):
            u = LogVal(u)
        coeff, key = _canonical_term(u.q, u.logs)
        return Exact({key: coeff})

    @staticmethod
    def rat_pow(base: Rat, w: Rat) -> "Exact":
        """base^w for rational base > 0 and rational w."""
        base = _as_fraction(base)
        if base <= 0:
            raise ValueError("rat_pow expects a positive base")
        w = _as_fraction(w)
        if w.denominator == 1:
            return Exact.of(base ** w)
        return Exact.exp(LogVal.log(base, w))

    # arithmetic --------------------------------------------------------------
    def __add__(self, other):
        other = other if isinstance(other, Exact) else Exact.of(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            s = out.get(k, Fraction(0)) + c
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        return Exact(out)

    __radd__ = __add__

    def __neg__(self):
        return Exact({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-(other if isinstance(other, Exact) else Exact.of(other)))

    def __rsub__(self, other):
        return Exact.of(other) - self

    def __mul__(self, other):
        if not isinstance(other, Exact):
            f = _as_fraction(other)
            if not f:
                return Exact.zero()
            return Exact({k: c * f for k, c in self.terms.items()})
        out: dict = {}
        for (q1, p1), c1 in self.terms.items():
            for (q2, p2), c2 in other.terms.items():
                logs = dict(p1)
                for m, w in p2:
                    logs[m] = logs.get(m, Fraction(0)) + w
                mult, key = _canonical_term(q1 + q2, tuple(logs.items()))
                s = out.get(key, Fraction(0)) + c1 * c2 * mult
                if s:
                    out[key] = s
                else:
                    out.pop(key, None)
        return Exact(out)

    __rmul__ = __mul__

    # predicates --------------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def is_rational(self) -> Optional[Fraction]:
        if not self.terms:
            return Fraction(0)
        if len(self.terms) == 1:
            (key, c), = self.terms.items()
            if key == (Fraction(0), ()):
                return c
        return None

    def sign(self) -> int:
        if not self.terms:
            return 0
        signs = {(c > 0) - (c < 0) for c in self.terms.values()}
        if signs == {1}:
            return 1  # every term is a positive real
        if signs == {-1}:
            return -1
        # two terms a*e^u - b*e^v with equal log-parts: sign via exponents
        if len(self.terms) == 2:
            (k1, c1), (k2, c2) = self.terms.items()
            if k1[1] == k2[1] and c1 == -c2:
                s = (k1[0] > k2[0]) - (k1[0] < k2[0])
                return s if c1 > 0 else -s
        return self._sign_numeric()

    def _sign_numeric(self) -> int:
        for bits in _PRECISIONS:
            lo = hi = Fraction(0)
            for key, c in self.terms.items():
                alo, ahi = _atom_bounds_cached(key, bits)
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
        raise IndeterminatePredicate(f"sign undecided at {_PRECISIONS[-1]} bits: {self!r}")

    def cmp(self, other) -> int:
        return (self - (other if isinstance(other, Exact) else Exact.of(other))).sign()

    def __eq__(self, other):
        if not isinstance(other, (Exact, int, Fraction)):
            return NotImplemented
        other = other if isinstance(other, Exact) else Exact.of(other)
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __le__(self, other):
        return self.cmp(other) <= 0

    def __lt__(self, other):
        return self.cmp(other) < 0

    def __ge__(self, other):
        return self.cmp(other) >= 0

    def __gt__(self, other):
        return self.cmp(other) > 0

    # numerics ----------------------------------------------------------------
    def bounds(self, bits: int = 128) -> Tuple[Fraction, Fraction]:
        lo = hi = Fraction(0)
        for key, c in self.terms.items():
            alo, ahi = _atom_bounds_cached(key, bits)
            if c >= 0:
                lo += c * alo
                hi += c * ahi
            else:
                lo += c * ahi
                hi += c * alo
        return lo, hi

    def lower_rational(self, bits: int = 128) -> Fraction:
        return self.bounds(bits)[0]

    def upper_rational(self, bits: int = 128) -> Fraction:
        return self.bounds(bits)[1]

    def approx(self) -> float:
        lo, hi = self.bounds(64)
        mid = (lo + hi) / 2
        return float(mid)

    def __repr__(self):
        if not self.terms:
            return "0"
        bits = []
        for (q, pows), c in sorted(self.terms.items(), key=lambda kv: str(kv[0])):
            s = str(c)
            if q:
                s += f"*e^({q})"
            for m, w in pows:
                s += f"*{m}^({w})"
            bits.append(s)
        return " + ".join(bits)


# --------------------------------------------------------------------------
# Rational helpers for witness-constant derivations
# --------------------------------------------------------------------------

def rational_upper(u: LogVal, grain: int = 10_000) -> Fraction:
    """Smallest multiple of 1/grain certified to be >= u."""
    lo, hi = u.bounds(128)
    n = (hi * grain).__ceil__()
    cand = Fraction(n, grain)
    while LogVal(cand).cmp(u) < 0:  # certify, stepping up if rounding was unlucky
        n += 1
        cand = Fraction(n, grain)
    return cand


def rational_lower(u: LogVal, grain: int = 10_000) -> Fraction:
    lo, _ = u.bounds(128)
    n = (lo * grain).__floor__()
    cand = Fraction(n, grain)
    while LogVal(cand).cmp(u) > 0:
        n -= 1
        cand = Fraction(n, grain)
    return cand
