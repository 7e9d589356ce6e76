import random
from fractions import Fraction

import pytest

from schmidt_games.errors import (
    ConditionTwoSixUnavailable,
    DecayTooWeak,
    LStarCertificateFails,
    NStarNotOne,
)
from schmidt_games.exactnum import Exact, LogVal, rational_upper
from schmidt_games.families import HoroballFamily, PeriodicWordFamily, RationalFamily
from schmidt_games.geometry import (
    Box,
    Cylinder,
    FormalBall,
    Point,
    Slab,
    Tri,
    cantor_support,
    contains,
    disjoint,
    disjoint_from_all,
    euclidean_support,
    psi_eval,
    rational_box,
    shift_spec,
    shift_support,
    standard_spec,
)
from schmidt_games.strategy import (
    AffineMap,
    DecaySpec,
    DiffusenessWitness,
    FamilyDecay,
    MeasureSpec,
    SDiffuse,
    compose_diffuseness,
    decay_to_diffuse,
    find_avoiding_ball,
    lipschitz_exponent,
    plan_is_sound,
    require_strong_for_classic,
    separation_to_witness,
    strong_strategy_step,
    transport_family,
    uniformly_perfect_to_diffuse,
    validate_sandwich,
    weak_strategy_step,
    winning_constant,
)


# -- find_avoiding_ball -------------------------------------------------------

def test_avoid_shift_picks_free_symbol():
    spec = shift_spec(3)
    sup = shift_support(3)
    ball = FormalBall(Point.of_word([0, 1]), Fraction(2))
    obstacle = (Cylinder((0, 1, 2), 3),)
    got = find_avoiding_ball(sup, spec, ball, obstacle, 3)
    assert got.center.word == (0, 1, 0)  # lexicographically first free child


def test_avoid_interval_with_oracle():
    """Ball around 0 at t=0, obstacle [-1/4, 1/4]: the found ball is verified
    by the independent predicate oracle on both inclusions."""
    spec = standard_spec(1, dim=1)
    sup = euclidean_support(1)
    ball = FormalBall(Point.euclidean(0), Fraction(0))
    obstacle = (rational_box([(Fraction(-1, 4), Fraction(1, 4))]),)
    got = find_avoiding_ball(sup, spec, ball, obstacle, Fraction(7, 5))
    region = psi_eval(spec, got)
    assert contains(psi_eval(spec, ball), region) is Tri.YES
    assert disjoint(region, obstacle[0]) is Tri.YES
    # closed-form offset clears the obstacle on the positive side first
    assert got.center.coords[0] > Fraction(1, 4)


def test_avoid_cantor_cells():
    spec = standard_spec(1, dim=1)
    sup = cantor_support()
    ball = FormalBall(Point.euclidean(Fraction(1, 2)), Fraction(0))
    # obstacle: the middle of the unit interval; survivors live in [0,1/3]+[2/3,1]
    obstacle = (rational_box([(Fraction(7, 18), Fraction(11, 18))]),)
    got = find_avoiding_ball(sup, spec, ball, obstacle, Fraction(3))
    assert sup.contains_point(got.center)
    region = psi_eval(spec, got)
    assert disjoint(region, obstacle[0]) is Tri.YES
    assert contains(psi_eval(spec, ball), region) is Tri.YES


def test_avoid_empty_obstacle_recenters():
    spec = standard_spec(1, dim=1)
    sup = euclidean_support(1)
    ball = FormalBall(Point.euclidean(Fraction(1, 3)), Fraction(1))
    got = find_avoiding_ball(sup, spec, ball, (), Fraction(2))
    assert got.center.coords == (Fraction(1, 3),)
    assert got.t == 2


# -- strategy steps ------------------------------------------------------------

def farey_witness():
    from schmidt_games.instances import build_farey_r1
    return build_farey_r1().witness


def test_strong_step_farey_plan_sound():
    from schmidt_games.instances import build_farey_r1
    inst = build_farey_r1()
    ball = FormalBall(Point.euclidean(Fraction(1, 3)), Fraction(4))
    plan = strong_strategy_step(inst.support, inst.spec, inst.family,
                                inst.witness, ball, Fraction(3), 1)
    assert plan_is_sound(inst.spec, ball, plan)
    assert plan.obstacle_count >= 1  # 1/3 itself is a tangency in range
    assert plan.window_lo == inst.witness.b_star
    assert plan.window_hi == 3


def test_weak_step_periodic_words():
    from schmidt_games.instances import build_shift3_periodic
    inst = build_shift3_periodic()
    # make the witness graded to exercise the weak route
    graded = DiffusenessWitness(strength="graded", b_star=inst.witness.b_star,
                                provenance="test")
    ball = FormalBall(Point.of_word((0, 1, 0, 1, 0, 1, 0, 1)), Fraction(6))
    plan = weak_strategy_step(inst.support, inst.spec, inst.family, graded,
                              ball, Fraction(3), 1, 1)
    assert plan_is_sound(inst.spec, ball, plan)
    got = psi_eval(inst.spec, plan.witness_ball)
    assert got.word[:6] == (0, 1, 0, 1, 0, 1)
    assert len(got.word) == 9


def test_weak_step_empty_window_recenters():
    from schmidt_games.instances import build_horoball_list_demo
    inst = build_horoball_list_demo()
    graded = DiffusenessWitness(strength="graded", b_star=inst.witness.b_star,
                                provenance="test")
    # park the ball far from [0,1] where the demo family has no members
    ball = FormalBall(Point.euclidean(Fraction(1000)), Fraction(4))
    plan = weak_strategy_step(inst.support, inst.spec, inst.family, graded,
                              ball, Fraction(3), 1, 1)
    assert plan.obstacle_count == 0
    assert plan.witness_ball.center.coords == ball.center.coords
    assert plan.witness_ball.t == ball.t + 3


def test_plan_soundness_random_farey_games():
    """Plan invariant holds across many strategy steps at random balls."""
    from schmidt_games.instances import build_farey_r1
    inst = build_farey_r1()
    rng = random.Random(23)
    for _ in range(40):
        c = Fraction(rng.randrange(0, 257), 256)
        t = Fraction(rng.randrange(8, 40), 4)
        ball = FormalBall(Point.euclidean(c), t)
        plan = strong_strategy_step(inst.support, inst.spec, inst.family,
                                    inst.witness, ball, inst.default_b, 1)
        assert plan_is_sound(inst.spec, ball, plan)


# -- witness derivations ----------------------------------------------------------

def test_uniformly_perfect_formula():
    beta = uniformly_perfect_to_diffuse(LogVal.log(3))
    assert (beta - LogVal.log(16)).sign() == 0  # log3 + log4 + log(4/3) = log16
    beta0 = uniformly_perfect_to_diffuse(0)
    assert (beta0 - (LogVal.log(16) - LogVal.log(3))).sign() == 0


def test_compose_formula_and_nstar_guard():
    sd = SDiffuse(b_star=Fraction(3, 2), collection="points")
    w = compose_diffuseness(sd, Fraction(1, 2), Fraction(1, 4))
    assert w.b_star == Fraction(3, 2) + Fraction(1, 2) + Fraction(1, 4)
    assert w.strength == "strong"
    with pytest.raises(NStarNotOne):
        compose_diffuseness(sd, Fraction(1), Fraction(1), n_star=2)


def test_separation_witness_shift_constants():
    # cbar = 1: l* = log 2, d* = log 3, beta = 1: b = log2 + log3 + 1
    w = separation_to_witness(cbar=1, beta=Fraction(1),
                              d_star=rational_upper(LogVal.log(3)))
    expect = rational_upper(LogVal.log(2), 100) + rational_upper(LogVal.log(3)) + 1
    assert w.b_star == expect
    assert LogVal(w.b_star).cmp(LogVal.log(6) + 1) > 0  # outward rounding


def test_decay_to_diffuse_point_route():
    m = MeasureSpec(kind="lebesgue", support=euclidean_support(1),
                    decay=DecaySpec(delta=Fraction(1), c_delta=Fraction(1),
                                    collection="points"))
    sd = decay_to_diffuse(m, rational_upper(LogVal.log(3)))
    assert isinstance(sd, SDiffuse)
    # b* > log(c)/delta + 2 d* = 0 + 2 log 3
    assert LogVal(sd.b_star).cmp(LogVal.log(9)) > 0


def test_decay_to_diffuse_graded_and_too_weak():
    lac = MeasureSpec(kind="lebesgue", support=euclidean_support(2),
                      family_decay=FamilyDecay("lacunary", Fraction(2),
                                               delta=Fraction(1), c_delta=Fraction(2)))
    w = decay_to_diffuse(lac, rational_upper(LogVal.log(3)))
    assert w.strength == "graded"
    assert w.b_star > 2  # b* + 2 d* with d* = log 3
    # phi growing at the decay rate: unsatisfiable
    bad = MeasureSpec(kind="lebesgue", support=euclidean_support(2),
                      family_decay=FamilyDecay("exp", Fraction(1),
                                               delta=Fraction(1), c_delta=Fraction(1)))
    with pytest.raises(DecayTooWeak):
        decay_to_diffuse(bad, Fraction(1))


def test_winning_constant():
    assert winning_constant(1, 1, LogVal.log(4) and Fraction(7, 5)) == Fraction(14, 5)
    assert winning_constant(2, 3, 1) == 9


def test_classic_requires_strong():
    graded = DiffusenessWitness(strength="graded", b_star=Fraction(2))
    with pytest.raises(ConditionTwoSixUnavailable):
        require_strong_for_classic(graded)
    require_strong_for_classic(DiffusenessWitness(strength="strong",
                                                  b_star=Fraction(2)))


# -- transport ------------------------------------------------------------------

def test_transport_translation_identity():
    m = AffineMap(((Fraction(1),),), (Fraction(7),))
    assert lipschitz_exponent(m) == 0
    fam = HoroballFamily(farey=True)
    w = farey_witness()
    moved, w2 = transport_family(m, fam, w, standard_spec(1, dim=1))
    assert w2.b_star == w.b_star
    ms = moved.members(((Fraction(7), Fraction(8)),), LogVal(3) + LogVal.log(2))
    assert all(Fraction(7) <= p.point[0] <= Fraction(8) for p in ms)


def test_transport_doubling_sizes_drop():
    m = AffineMap(((Fraction(2),),), (Fraction(1),))
    L = lipschitz_exponent(m)
    assert LogVal(L).cmp(LogVal.log(2)) >= 0 and L <= Fraction(70, 100)
    spec = standard_spec(1, dim=1)
    samples = [FormalBall(Point.euclidean(Fraction(j, 7)), Fraction(j % 5))
               for j in range(1, 40)]
    validate_sandwich(m, spec, L, samples)  # must not raise
    fam = HoroballFamily(farey=True)
    w = farey_witness()
    moved, w2 = transport_family(m, fam, w, spec, samples)
    assert w2.b_star == w.b_star + 2 * L
    assert (moved.size_of(3) - (LogVal(3) + LogVal.log(2) - L)).sign() == 0


def test_transport_shear_r2():
    m = AffineMap(((Fraction(1), Fraction(1)), (Fraction(0), Fraction(1))),
                  (Fraction(0), Fraction(0)))
    L = lipschitz_exponent(m)
    spec = standard_spec(1, dim=2)
    samples = [FormalBall(Point.euclidean(Fraction(i, 3), Fraction(j, 3)),
                          Fraction(k)) for i in range(3) for j in range(3)
               for k in range(0, 4)]
    validate_sandwich(m, spec, L, samples)


def test_transport_bad_lipschitz_fails():
    m = AffineMap(((Fraction(2),),), (Fraction(0),))
    spec = standard_spec(1, dim=1)
    with pytest.raises(LStarCertificateFails):
        validate_sandwich(m, spec, Fraction(1, 10),
                          [FormalBall(Point.euclidean(Fraction(0)), Fraction(1))])
