import json
from fractions import Fraction

import pytest

from schmidt_games.engine import (
    BStrategy,
    GameParams,
    Move,
    Transcript,
    compute_m_star,
    new_game,
    parse_fraction,
    transcript_from_json,
)
from schmidt_games.errors import BStalled, IllegalMove, InconsistentParams
from schmidt_games.exactnum import LogVal
from schmidt_games.geometry import FormalBall, Point, Tri, contains, psi_eval
from schmidt_games.instances import get_instance


def shift_inst():
    return get_instance("shift3-periodic")


def farey_inst():
    return get_instance("farey-r1")


def test_new_game_valid_initial_state():
    inst = shift_inst()
    g = new_game(inst, GameParams(b=Fraction(3), seed=1))
    assert g.status == "awaiting-A"
    assert g.k == 1
    assert g.moves[0].role == "B"
    assert inst.support.contains_point(g.ball.center)


def test_new_game_b_below_bstar():
    inst = shift_inst()
    with pytest.raises(InconsistentParams):
        new_game(inst, GameParams(b=inst.witness.b_star / 2))


def test_new_game_scripted_out_of_support():
    inst = shift_inst()
    bad_open = FormalBall(Point.of_word((0, 1, 7)), Fraction(2))
    with pytest.raises(IllegalMove):
        new_game(inst, GameParams(b=Fraction(3)), BStrategy.scripted([bad_open]))


def test_m_star_policy():
    inst = farey_inst()
    params = GameParams(b=Fraction(3))
    # t1 barely above s1: m* = 1
    assert compute_m_star(inst, params, Fraction(2)) == 1
    # huge opening height forces a larger window multiple:
    # smallest m with 3m >= 10 - (1 + log 2)
    assert compute_m_star(inst, params, Fraction(10)) == 3


def test_validate_move_window_and_overlap():
    inst = farey_inst()
    g = new_game(inst, GameParams(b=Fraction(3), seed=5))
    g.step()  # install plan
    assert g.status == "awaiting-B"
    plan = g.plan
    w = plan.witness_ball
    ok, reason = g.validate_move(w)
    assert ok, reason
    # increment below the window
    low = FormalBall(g.ball.center, g.ball.t + plan.window_lo / 2)
    ok, reason = g.validate_move(low)
    assert not ok and reason == "HeightWindow"
    # ball outside the parent
    far = FormalBall(Point.euclidean(g.ball.center.coords[0] + 10),
                     g.ball.t + plan.window_hi)
    ok, reason = g.validate_move(far)
    assert not ok and reason == "Containment"


def test_obstacle_overlap_rejected():
    inst = farey_inst()
    g = new_game(inst, GameParams(b=Fraction(3), seed=6))
    g.step()
    plan = g.plan
    if plan.obstacle_count:
        # aim straight at the first obstacle piece's anchor
        from schmidt_games.engine import _piece_anchor
        anchor = _piece_anchor(plan.obstacle[0])
        mv = FormalBall(Point.euclidean(*anchor), g.ball.t + plan.window_hi)
        ok, reason = g.validate_move(mv)
        assert not ok
        assert reason in ("ObstacleOverlap", "Containment")


def test_run_zero_rounds():
    inst = shift_inst()
    g = new_game(inst, GameParams(b=Fraction(3), seed=2))
    tr = g.run(0)
    assert len(tr.moves) == 1 and tr.moves[0].role == "B"


def test_run_nesting_invariant():
    inst = shift_inst()
    g = new_game(inst, GameParams(b=Fraction(3), seed=3))
    tr = g.run(12)
    b_moves = [m.ball for m in tr.moves if m.role == "B"]
    assert len(b_moves) == 13
    for prev, nxt in zip(b_moves, b_moves[1:]):
        assert contains(psi_eval(inst.spec, prev), psi_eval(inst.spec, nxt)) is Tri.YES


def test_run_farey_nesting_and_constant():
    inst = farey_inst()
    g = new_game(inst, GameParams(b=Fraction(3), seed=4))
    tr = g.run(6)
    b_moves = [m.ball for m in tr.moves if m.role == "B"]
    for prev, nxt in zip(b_moves, b_moves[1:]):
        assert contains(psi_eval(inst.spec, prev), psi_eval(inst.spec, nxt)) is Tri.YES
        db = nxt.t - prev.t
        assert inst.witness.b_star <= db <= 3
    # l* = 1, m* = 1: c = 2b
    assert tr.constant == 6


def test_transcript_roundtrip_bits():
    inst = farey_inst()
    g = new_game(inst, GameParams(b=Fraction(3), seed=11))
    tr = g.run(5)
    blob = tr.dumps()
    back = transcript_from_json(json.loads(blob), inst)
    assert back.dumps() == blob


def test_determinism_same_seed():
    inst = shift_inst()
    t1 = new_game(inst, GameParams(b=Fraction(3), seed=42)).run(10).dumps()
    t2 = new_game(inst, GameParams(b=Fraction(3), seed=42)).run(10).dumps()
    assert t1 == t2
    t3 = new_game(inst, GameParams(b=Fraction(3), seed=43)).run(10).dumps()
    assert t3 != t1


def test_greedy_b_runs():
    inst = farey_inst()
    g = new_game(inst, GameParams(b=Fraction(3), seed=7), BStrategy.greedy())
    tr = g.run(5)
    assert len([m for m in tr.moves if m.role == "B"]) == 6


def test_classic_height_law():
    inst = farey_inst()
    params = GameParams(variant="classic", b=Fraction(3), a=Fraction(3),
                        t1=Fraction(0), seed=9)
    g = new_game(inst, params)
    tr = g.run(5)
    b_moves = [m.ball for m in tr.moves if m.role == "B"]
    for k, mv in enumerate(b_moves):
        assert mv.t == Fraction(0) + k * (Fraction(3) + Fraction(3))
    a_moves = [m.ball for m in tr.moves if m.role == "A"]
    for k, mv in enumerate(a_moves, start=1):
        assert mv.t == Fraction(0) + (k - 1) * 6 + 3


def test_classic_rejects_wrong_height():
    inst = farey_inst()
    params = GameParams(variant="classic", b=Fraction(3), a=Fraction(3),
                        t1=Fraction(0), seed=9)
    g = new_game(inst, params)
    g.step()
    bad = FormalBall(g.classic_a_ball.center, g.ball.t + 5)  # not a+b
    ok, reason = g.validate_move(bad)
    assert not ok and reason == "HeightWindow"


def test_absolute_point_round():
    inst = farey_inst()
    params = GameParams(variant="absolute_point", b=Fraction(3), seed=13)
    g = new_game(inst, params)
    g.step()
    assert g.plan.obstacle_count <= 1
    g.step()
    assert g.k == 2


def test_absolute_deletion_depth_guard():
    inst = farey_inst()
    params = GameParams(variant="absolute_point", b=Fraction(3), a=Fraction(2),
                        seed=13)
    g = new_game(inst, params)
    with pytest.raises(InconsistentParams):
        g.step()


def test_scripted_illegal_stalls():
    inst = shift_inst()
    opening = FormalBall(Point.of_word((0, 1, 2, 0, 1, 2, 0, 1, 2)), Fraction(6))
    bad = FormalBall(Point.of_word((2,) * 7), Fraction(7))  # not inside opening
    g = new_game(inst, GameParams(b=Fraction(3), seed=1),
                 BStrategy.scripted([opening, bad]))
    g.step()
    with pytest.raises(BStalled):
        g.step()


def test_external_submit_move():
    inst = shift_inst()
    g = new_game(inst, GameParams(b=Fraction(3), seed=1), BStrategy.external())
    g.step()  # plan installed
    st = g.step()
    assert st == "awaiting-external"
    ok, reason = g.submit_move(g.plan.witness_ball)
    assert ok
    assert g.k == 2
    ok, reason = g.submit_move(g.plan.witness_ball if g.plan else
                               FormalBall(Point.of_word((0,)), Fraction(1)))
    assert not ok and reason == "OutOfTurn"


def test_parse_fraction():
    assert parse_fraction("3/4") == Fraction(3, 4)
    assert parse_fraction("7") == Fraction(7)
