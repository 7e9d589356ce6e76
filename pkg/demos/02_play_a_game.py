"""One full game on the Ford-circle family, move by move.

Player B (here: the greedy opponent, which aims straight at resonant
points) picks shrinking intervals; player A answers each move with a
deletion set and a guaranteed escape ball.  The transcript replays
deterministically and the outcome interval avoids every shrunk horoball
neighborhood up to the certified constant c = (l*+1) m* b.
"""

from fractions import Fraction

from schmidt_games.engine import BStrategy, GameParams, new_game
from schmidt_games.geometry import psi_eval
from schmidt_games.instances import get_instance
from schmidt_games.verify import badness_certificate, default_horizon

inst = get_instance("farey-r1")
print(f"instance {inst.id}: witness b* = {inst.witness.b_star} "
      f"({inst.witness.provenance})")

game = new_game(inst, GameParams(b=Fraction(3), seed=7), BStrategy.greedy())
for _ in range(12):
    game.step()
    if game.plan is not None:
        print(f"round {game.k}: A deletes {game.plan.obstacle_count} pieces "
              f"at height {float(game.plan.deletion_height):.3f}")

transcript = game.run(6)
deep = transcript.deepest
print(f"deepest ball: center={float(deep.center.coords[0]):.9f} t={float(deep.t):.3f}")
print(f"winning constant c = {transcript.constant}")

outcome = psi_eval(inst.spec, deep)
cert = badness_certificate(outcome, inst.family, inst.spec, transcript.constant,
                           default_horizon(transcript))
print("badness certificate:", "PASS" if cert.verdict else "FAIL")

# Bit-exact replay: serialize, parse, resnapshot.
import json
from schmidt_games.engine import transcript_from_json
blob = transcript.dumps()
again = transcript_from_json(json.loads(blob), inst)
print("replay byte-identical:", again.dumps() == blob)
