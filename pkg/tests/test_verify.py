import json
import math
from fractions import Fraction

import pytest

from schmidt_games.engine import BStrategy, GameParams, new_game
from schmidt_games.errors import (
    AuditFailure,
    IntervalTooWide,
    PrefixTooShort,
)
from schmidt_games.exactnum import Exact, LogVal
from schmidt_games.families import ExplicitFamily, HoroballFamily, ToralFamily
from schmidt_games.geometry import Box, FormalBall, Point, psi_eval, rational_box
from schmidt_games.instances import get_instance
from schmidt_games.verify import (
    audit_classic_as_weak,
    badness_certificate,
    cf_bound_from_constant,
    cf_oracle,
    default_horizon,
    dimension_lower_bound,
    exact_power_law_identity,
    measure_decay_check,
    power_law_check,
    shift_check,
    toral_check,
    transcript_audit,
    weighted_bad_check,
)


# -- badness certificates -------------------------------------------------------

def test_certificate_empty_family_passes():
    fam = ExplicitFamily([])
    outcome = rational_box([(0, 1)])
    cert = badness_certificate(outcome, fam, get_instance("farey-r1").spec, 0, 5)
    assert cert.verdict


def test_certificate_fails_on_resonant_point():
    fam = HoroballFamily(farey=True)
    inst = get_instance("farey-r1")
    outcome = rational_box([(Fraction(1, 2) - Fraction(1, 10**6),
                             Fraction(1, 2) + Fraction(1, 10**6))])
    cert = badness_certificate(outcome, fam, inst.spec, Fraction(1, 2),
                               LogVal(3) + LogVal.log(2))
    assert not cert.verdict
    assert "(1/2)" in cert.witnesses


def test_certificate_farey_game_end_to_end():
    inst = get_instance("farey-r1")
    g = new_game(inst, GameParams(b=Fraction(3), seed=101))
    tr = g.run(6)
    outcome = psi_eval(inst.spec, tr.deepest)
    cert = badness_certificate(outcome, inst.family, inst.spec, tr.constant,
                               default_horizon(tr), transcript_ref="t")
    assert cert.verdict, cert.witnesses


def test_certificate_shift_game_end_to_end():
    inst = get_instance("shift3-periodic")
    g = new_game(inst, GameParams(b=Fraction(3), seed=7))
    tr = g.run(20)
    outcome = psi_eval(inst.spec, tr.deepest)
    cert = badness_certificate(outcome, inst.family, inst.spec, tr.constant,
                               default_horizon(tr))
    assert cert.verdict, cert.witnesses


# -- continued fractions -----------------------------------------------------------

def test_cf_oracle_golden_ratio():
    # outer rational bounds of 2/(1+sqrt 5) = 0.6180339887...
    lo = Fraction(6180339887, 10**10)
    hi = Fraction(6180339888, 10**10)
    got = cf_oracle(lo, hi, 10)
    assert got["quotients"] == [1] * 10
    assert got["max_quotient"] == 1


def test_cf_oracle_rational_blowup():
    got = cf_oracle(Fraction(1, 3), Fraction(1, 3) + Fraction(1, 10**9), 12)
    assert got["blow_up"]


def test_cf_oracle_too_wide():
    with pytest.raises(IntervalTooWide):
        cf_oracle(Fraction(1, 10), Fraction(9, 10), 3)


def test_cf_bound_from_constant():
    # kappa = e^-2c / 4: quotient bound just over 4 e^{2c}
    M = cf_bound_from_constant(Fraction(1), "plain")
    assert M == math.floor(4 * math.e ** 2) + 1


# -- weighted badness -----------------------------------------------------------------

def test_weighted_bad_check_zero_at_rational():
    outcome = rational_box([(Fraction(-1, 10**9), Fraction(1, 10**9)),
                            (Fraction(-1, 10**9), Fraction(1, 10**9))])
    got = weighted_bad_check(outcome, (Fraction(2, 3), Fraction(1, 3)), 3)
    assert got["min_check_value"] == 0.0


def test_weighted_bad_check_threshold_pass():
    # box away from every p/q with q <= 10, with a generous threshold
    c = Fraction(1, 10**7)
    outcome = rational_box([(Fraction(414213562, 10**9) - c,
                             Fraction(414213562, 10**9) + c),
                            (Fraction(577215664, 10**9) - c,
                             Fraction(577215664, 10**9) + c)])
    thresh = Exact.exp(LogVal(-12))
    got = weighted_bad_check(outcome, (Fraction(2, 3), Fraction(1, 3)), 10,
                             threshold=thresh)
    assert got["pass"]
    assert got["min_display_normalized"] > 0


# -- shift / toral checks ----------------------------------------------------------------

def test_shift_check_alternating_word():
    prefix = tuple([0, 1] * 40)
    assert shift_check(prefix, (0,), c=1, rounds=20)


def test_shift_check_detects_match():
    prefix = (1, 0, 0, 0, 0, 1) + tuple([0, 1] * 30)
    assert not shift_check(prefix, (0,), c=1, rounds=10)


def test_shift_check_prefix_too_short():
    with pytest.raises(PrefixTooShort):
        shift_check((0, 1, 0), (0, 1), c=3, rounds=5)


def diag2(K=4):
    mats = [[[Fraction(2 ** k), 0], [0, Fraction(2 ** k)]] for k in range(1, K + 1)]
    return ToralFamily(mats, taus=[Fraction(1)] * K)


def test_toral_check_fail_at_lattice_point():
    fam = diag2()
    outcome = rational_box([(Fraction(-1, 10**6), Fraction(1, 10**6)),
                            (Fraction(-1, 10**6), Fraction(1, 10**6))])
    assert not toral_check(outcome, fam, Exact.of(Fraction(1, 100)), 3)


def test_toral_check_vacuous_k0():
    fam = diag2()
    outcome = rational_box([(0, 1), (0, 1)])
    assert toral_check(outcome, fam, Exact.of(1), 0)


def test_toral_check_passes_away_from_targets():
    fam = diag2(K=2)
    # M_1 = diag(4), M_2 = diag(8) (k starts at 1 => 2^k = 2, 4): center far
    # from lattice preimages at scale 2 and 4
    outcome = rational_box([(Fraction(1, 8) - Fraction(1, 10**6),
                             Fraction(1, 8) + Fraction(1, 10**6)),
                            (Fraction(1, 8) - Fraction(1, 10**6),
                             Fraction(1, 8) + Fraction(1, 10**6))])
    # Euclidean d(2x, Z) = sqrt(2)/4 ~ 0.3536 at x = (1/8, 1/8)
    assert toral_check(outcome, fam, Exact.of(Fraction(1, 3)), 2)
    assert not toral_check(outcome, fam, Exact.of(Fraction(2, 5)), 2)


# -- measure audits -------------------------------------------------------------------------

def test_measure_decay_lebesgue_r1_points():
    inst = get_instance("farey-r1")
    got = measure_decay_check(inst.measure, inst.spec, "points", 300, seed=5)
    assert got["violations"] == 0
    assert got["worst_ratio_vs_bound"] <= 1.0


def test_measure_decay_weighted_hyperplanes():
    inst = get_instance("rational-weighted-r2")
    got = measure_decay_check(inst.measure, inst.spec, "hyperplanes", 200, seed=6)
    assert got["violations"] == 0


def test_measure_decay_cantor_points():
    inst = get_instance("cantor-times-rational")
    got = measure_decay_check(inst.measure, inst.spec, "points", 200, seed=7)
    assert got["violations"] == 0


def test_power_law_exact_identities():
    inst = get_instance("rational-weighted-r2")
    assert exact_power_law_identity(inst.measure, inst.spec, 50, seed=1)
    sh = get_instance("shift3-periodic")
    assert exact_power_law_identity(sh.measure, sh.spec, 50, seed=2)


def test_power_law_check_cantor_bracketed():
    inst = get_instance("cantor-times-rational")
    got = power_law_check(inst.measure, inst.spec, 120, seed=3)
    assert got["min_vs_lower"] <= 1.0 or got["min_vs_lower"] > 0


# -- dimension estimator -------------------------------------------------------------------

def test_dimension_shift_full_tree():
    inst = get_instance("shift3-periodic")
    est = dimension_lower_bound(inst, b=Fraction(3), depth=3, level_cap=16, seed=1)
    assert est.child_min >= 2
    assert est.empirical_slope <= math.log(3) + 1e-9
    assert est.empirical_slope >= est.theoretical_bound - 0.05


def test_dimension_farey_slope_near_one():
    inst = get_instance("farey-r1")
    est = dimension_lower_bound(inst, b=Fraction(4), depth=4, level_cap=12, seed=2)
    assert est.child_min >= 2
    assert abs(est.empirical_slope - 1.0) < 0.2


# -- transcript audit --------------------------------------------------------------------------

def test_transcript_audit_roundtrip():
    inst = get_instance("shift3-periodic")
    tr = new_game(inst, GameParams(b=Fraction(3), seed=31)).run(10)
    assert transcript_audit(tr, inst)


def test_transcript_audit_detects_tampering():
    from schmidt_games.engine import transcript_from_json
    inst = get_instance("shift3-periodic")
    tr = new_game(inst, GameParams(b=Fraction(3), seed=32)).run(8)
    data = json.loads(tr.dumps())
    b_rows = [i for i, m in enumerate(data["moves"]) if m["role"] == "B"]
    data["moves"][b_rows[3]]["t"] = "999/1"
    bad = transcript_from_json(data, inst)
    with pytest.raises(AuditFailure):
        transcript_audit(bad, inst)


def test_classic_dual_audit():
    inst = get_instance("farey-r1")
    params = GameParams(variant="classic", b=Fraction(3), a=Fraction(3),
                        t1=Fraction(2), seed=33)
    tr = new_game(inst, params).run(5)
    assert transcript_audit(tr, inst)
    assert audit_classic_as_weak(tr, inst)
