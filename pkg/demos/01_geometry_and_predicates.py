"""Formal balls, regions and sound predicates.

A formal ball is a pair (center, height t); the monotonic function psi
turns it into a compact set that shrinks as t grows.  Radii like e^-t are
irrational, so the predicates work on symbolic values and only ever answer
yes/no when the answer is certified.
"""

from fractions import Fraction

from schmidt_games import (
    FormalBall, Point, Tri, contains, disjoint, psi_eval,
    standard_spec, weighted_spec, shift_spec,
)

# The standard function at scale 1 on the line: psi((x, t)) = [x - e^-t, x + e^-t]
spec = standard_spec(1, dim=1)
ball = FormalBall(Point.euclidean(0), Fraction(0))
print("psi((0, 0)) =", psi_eval(spec, ball).approx())

# Lifting the height shrinks the set, provably:
lifted = ball.lift(Fraction(3, 2))
print("contains after lift:", contains(psi_eval(spec, ball), psi_eval(spec, lifted)))

# A close call decided exactly: is psi((9/10, 1)) inside psi((0, 0))?
# The right endpoint is 9/10 + e^-1 = 1.2678... > 1, so: no.
inner = psi_eval(spec, FormalBall(Point.euclidean(Fraction(9, 10)), Fraction(1)))
print("0.9 + e^-1 <= 1 ?", contains(psi_eval(spec, ball), inner))

# Closed sets that merely touch are not disjoint:
from schmidt_games.geometry import rational_box
a = rational_box([(Fraction(1, 4), Fraction(3, 4))])
b = rational_box([(Fraction(-1, 4), Fraction(1, 4))])
print("touching boxes disjoint?", disjoint(a, b))

# Weighted boxes stretch each axis differently; shift cylinders are exact.
wspec = weighted_spec([Fraction(2, 3), Fraction(1, 3)], t_floor=Fraction(0))
wball = FormalBall(Point.euclidean(Fraction(1, 2), Fraction(1, 2)), Fraction(2))
print("weighted box:", psi_eval(wspec, wball).approx())

sspec = shift_spec(3)
sball = FormalBall(Point.of_word([0, 1, 2, 0]), Fraction(3))
print("depth-3 cylinder of 0120...:", psi_eval(sspec, sball).word)
