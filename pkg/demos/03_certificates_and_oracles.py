"""Cross-examining outcomes with independent oracles.

A badness certificate is an exhaustive disjointness check; for the
denominator family on the line, the continued-fraction oracle rederives
approximation quality from the outcome interval alone, and the two must
agree.  On shift spaces the check is purely combinatorial.
"""

from fractions import Fraction

from schmidt_games.engine import GameParams, new_game
from schmidt_games.geometry import psi_eval
from schmidt_games.instances import get_instance
from schmidt_games.verify import (
    badness_certificate, cf_bound_from_constant, cf_oracle, default_horizon,
    shift_check,
)

# -- continued fractions on a Cantor-supported game --------------------------
inst = get_instance("cantor-times-rational")
g = new_game(inst, GameParams(b=Fraction(3), seed=11, max_rounds=600))
while g.ball.t < 40:
    g.step()
g.status = "finished"
tr = g.snapshot()
outcome = psi_eval(inst.spec, tr.deepest)
cert = badness_certificate(outcome, inst.family, inst.spec, tr.constant,
                           default_horizon(tr))
lo, hi = outcome.rational_hull()[0]
cf = cf_oracle(lo, hi, 8)
print(f"certificate: {'PASS' if cert.verdict else 'FAIL'} at c = {tr.constant}")
print(f"partial quotients of the outcome: {cf['quotients']}")
print(f"quotient cap implied by c: {cf_bound_from_constant(tr.constant, 'plain')}")

# -- combinatorial check on the shift ----------------------------------------
sh = get_instance("shift3-periodic")
g2 = new_game(sh, GameParams(b=Fraction(3), seed=4))
tr2 = g2.run(40)
word = tr2.deepest.center.word
c_int = int(tr2.constant)
ok = shift_check(word, sh.family.period, c_int,
                 len(word) - sh.family.p - c_int - 1)
print(f"shift outcome prefix ({len(word)} symbols) avoids 01-periodic runs "
      f"of length p+c+1 = {sh.family.p + c_int + 1}: {ok}")
