"""Acceptance suite: one test per criterion, one PASS/FAIL line each.

Run with `pytest tests/test_acceptance.py -s` to see the per-criterion
lines and timings.  Tolerances are pinned here, not configurable.
"""

import math
import time
from fractions import Fraction

import pytest

from schmidt_games.engine import (
    BStrategy,
    GameParams,
    Instance,
    new_game,
)
from schmidt_games.errors import VolumeTooLarge
from schmidt_games.exactnum import Exact, LogVal, rational_upper
from schmidt_games.families import (
    HoroballFamily,
    PeriodicWordFamily,
    RationalFamily,
    fractions_in_interval,
    simplex_hyperplane,
)
from schmidt_games.geometry import (
    Box,
    FormalBall,
    Point,
    psi_eval,
    rational_box,
    standard_spec,
)
from schmidt_games.instances import build_shift3_periodic, get_instance
from schmidt_games.strategy import (
    AffineMap,
    DiffusenessWitness,
    transport_family,
    winning_constant,
)
from schmidt_games.verify import (
    audit_classic_as_weak,
    badness_certificate,
    cf_bound_from_constant,
    cf_oracle,
    default_horizon,
    dimension_lower_bound,
    exact_power_law_identity,
    measure_decay_check,
    shift_check,
    toral_check,
    transcript_audit,
    weighted_bad_check,
)

import random


def report(n: int, label: str, ok: bool, t0: float, extra: str = "") -> None:
    dt = time.time() - t0
    tag = "PASS" if ok else "FAIL"
    print(f"\nACCEPTANCE {n} [{tag}] {label} ({dt:.1f}s){' ' + extra if extra else ''}")
    assert ok, f"criterion {n} failed: {label} {extra}"


def test_criterion_1_shift_winning():
    """1000 games, random+greedy B, 100 rounds, alphabet 3, period '01':
    every outcome prefix passes the combinatorial avoidance check at
    c = ceil((l*+1) m* b); exact, tolerance 0, under 60 s."""
    t0 = time.time()
    inst = get_instance("shift3-periodic")
    b = Fraction(3)
    failures = 0
    for seed in range(1000):
        bs = BStrategy.random() if seed % 2 == 0 else BStrategy.greedy()
        g = new_game(inst, GameParams(b=b, seed=seed), bs)
        tr = g.run(100)
        c = tr.constant  # (l*+1) m* b = 2b = 6, already an integer
        c_int = -(-c.numerator // c.denominator)
        word = tr.deepest.center.word
        rounds = len(word) - inst.family.p - c_int - 1
        if not shift_check(word, inst.family.period, c_int, rounds):
            failures += 1
    ok = failures == 0 and (time.time() - t0) < 60
    report(1, "shift-space winning, 1000 games x 100 rounds", ok, t0,
           f"failures={failures}")


def test_criterion_2_r1_badly_approximable():
    """100 games of the denominator family to t ~ 40: certificates pass at
    c = (l*+1) m* b and the continued-fraction oracle sees >= 8 bounded
    partial quotients; verdict tolerance 0, under 5 minutes."""
    t0 = time.time()
    inst = get_instance("cantor-times-rational")
    bad = []
    for seed in range(100):
        g = new_game(inst, GameParams(b=Fraction(3), seed=seed, max_rounds=600))
        while g.ball.t < 40:
            g.step()
        g.status = "finished"
        tr = g.snapshot()
        expect_c = winning_constant(g.escape_depth(), g.m_star, Fraction(3))
        outcome = psi_eval(inst.spec, tr.deepest)
        cert = badness_certificate(outcome, inst.family, inst.spec, tr.constant,
                                   default_horizon(tr))
        hull = outcome.rational_hull()
        cf = cf_oracle(hull[0][0], hull[0][1], 8)
        bound = cf_bound_from_constant(tr.constant, inst.family.offset_kind)
        if not (cert.verdict and tr.constant == expect_c
                and len(cf["quotients"]) >= 8
                and all(q <= bound for q in cf["quotients"])):
            bad.append(seed)
    ok = not bad and (time.time() - t0) < 300
    report(2, "R^1 badly approximable, 100 games to t~40", ok, t0,
           f"bad_seeds={bad[:5]}")


def test_criterion_3_weighted_r2():
    """20 weighted games; the certified display bound over q <= 50 beats
    e^-(1+max r)c / (2^(2n+2) n!); exact rational comparison, under 10 min."""
    t0 = time.time()
    inst = get_instance("rational-weighted-r2")
    n = 2
    bad = []
    for seed in range(20):
        g = new_game(inst, GameParams(b=Fraction(11, 2), seed=seed))
        tr = g.run(2)
        c = tr.constant
        theta = Exact.exp(LogVal(Fraction(-5, 3) * c)) \
            * Fraction(1, 2 ** (2 * n + 2) * math.factorial(n))
        outcome = psi_eval(inst.spec, tr.deepest)
        got = weighted_bad_check(outcome, inst.spec.weights, 50, threshold=theta)
        if not got["pass"]:
            bad.append(seed)
    ok = not bad and (time.time() - t0) < 600
    report(3, "weighted R^2 display bound over q <= 50, 20 games", ok, t0,
           f"bad_seeds={bad}")


def test_criterion_4_simplex():
    """10^3 random boxes under the volume bound: all member sets affinely
    degenerate (exact rank); 10^2 boxes violating the bound admit a
    nondegenerate simplex with |det| >= 1/(q_1...q_(n+1)); under 2 min."""
    t0 = time.time()
    rng = random.Random(42)
    degen_ok = 0
    trials = 0
    while trials < 1000:
        n = rng.choice([1, 2, 3])
        k = rng.randint(2, 8)
        fam = RationalFamily(n)
        bound = Fraction(1, math.factorial(n) * k ** (n + 1))
        side = Fraction(1, int(float(bound) ** (-1 / n) * 2) + 1)
        corner = tuple(Fraction(rng.randint(0, 400), 400) for _ in range(n))
        region = rational_box([(c, c + side) for c in corner])
        try:
            res = simplex_hyperplane(region, k=k, n=n, family=fam)
        except VolumeTooLarge:
            continue
        trials += 1
        pts = [m.point for m in fam.members(region.rational_hull(), LogVal.log(k))]
        if len(pts) <= n or _affine_rank(pts) <= n - 1:
            if res is not None:
                normal, offset = res
                if any(sum(a * x for a, x in zip(normal, p)) != offset
                       for p in pts):
                    continue
            degen_ok += 1
    nondegen_ok = 0
    for trial in range(100):
        n = rng.choice([1, 2, 3])
        k = rng.randint(2, 5)
        fam = RationalFamily(n)
        region = rational_box([(0, 1)] * n)  # volume 1 >= the bound
        with pytest.raises(VolumeTooLarge):
            simplex_hyperplane(region, k=k, n=n, family=fam)
        pts = [m.point for m in fam.members(region.rational_hull(), LogVal.log(k))]
        simplex = _independent_simplex(pts, n)
        if simplex is None:
            continue
        det = _simplex_det(simplex)
        dens = 1
        for p in simplex:
            dens *= max(x.denominator for x in p) if p else 1
        if det != 0 and abs(det) >= Fraction(1, dens):
            nondegen_ok += 1
    ok = degen_ok == 1000 and nondegen_ok == 100 and (time.time() - t0) < 120
    report(4, "simplex degeneracy 10^3 + nondegenerate witnesses 10^2", ok, t0,
           f"degenerate={degen_ok}/1000 nondegenerate={nondegen_ok}/100")


def _affine_rank(points):
    if len(points) < 2:
        return 0
    base = points[0]
    rows = [[c - b for c, b in zip(p, base)] for p in points[1:]]
    basis = []
    for row in rows:
        r = list(row)
        for bvec in basis:
            piv = next(i for i, x in enumerate(bvec) if x != 0)
            if r[piv] != 0:
                f = r[piv] / bvec[piv]
                r = [x - f * y for x, y in zip(r, bvec)]
        if any(x != 0 for x in r):
            basis.append(r)
    return len(basis)


def _independent_simplex(pts, n):
    chosen = []
    for p in pts:
        if _affine_rank(chosen + [p]) == len(chosen):
            chosen.append(p)
        if len(chosen) == n + 1:
            return chosen
    return None


def _simplex_det(simplex):
    n = len(simplex) - 1
    rows = [[x - b for x, b in zip(p, simplex[0])] for p in simplex[1:]]
    # exact determinant by fraction-free elimination
    det = Fraction(1)
    m = [list(r) for r in rows]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            det = -det
        det *= m[col][col]
        for r in range(col + 1, n):
            f = m[r][col] / m[col][col]
            m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return det


def test_criterion_5_toral_avoidance():
    """diag(2^k) vs Z^2, K = 12: outcomes pass the orbit-distance check at
    cbar = e^-(c + log 12); exact rational distances, tolerance 0."""
    t0 = time.time()
    inst = get_instance("toral-diag2")
    bad = []
    for seed in range(10):
        g = new_game(inst, GameParams(b=Fraction(9), seed=seed))
        tr = g.run(3)
        c = tr.constant
        cbar = Exact.exp(LogVal(-c) - LogVal.log(12))
        outcome = psi_eval(inst.spec, tr.deepest)
        if not toral_check(outcome, inst.family, cbar, 12):
            bad.append(seed)
        cert = badness_certificate(outcome, inst.family, inst.spec, c,
                                   default_horizon(tr))
        if not cert.verdict:
            bad.append(seed)
    ok = not bad and (time.time() - t0) < 120
    report(5, "toral avoidance at cbar = e^-(c+log12), K=12", ok, t0,
           f"bad_seeds={bad}")


def test_criterion_6_measure_audits():
    """Power law reproduced exactly (Lebesgue n <= 3 and shift); decay
    ratios never exceed c_delta e^(-delta s) over 10^4 samples/instance."""
    t0 = time.time()
    from schmidt_games.geometry import weighted_spec, euclidean_support
    from schmidt_games.strategy import MeasureSpec

    ok = True
    # exact identities: mu(psi(x,t)) = 2^n e^-(n+1)t for n = 1, 2, 3
    for n in (1, 2, 3):
        spec = weighted_spec([Fraction(1, n)] * n, t_floor=Fraction(0))
        meas = MeasureSpec(kind="lebesgue", support=euclidean_support(n))
        ok = ok and exact_power_law_identity(meas, spec, 80, seed=n)
    sh = get_instance("shift3-periodic")
    ok = ok and exact_power_law_identity(sh.measure, sh.spec, 80, seed=9)
    # decay audits, 10^4 samples per instance, zero violations
    audits = [
        ("farey-r1", "points"),
        ("rational-weighted-r2", "hyperplanes"),
        ("cantor-times-rational", "points"),
        ("shift3-periodic", "points"),
        ("toral-diag2", "hyperplanes"),
    ]
    details = []
    for iid, cls in audits:
        inst = get_instance(iid)
        got = measure_decay_check(inst.measure, inst.spec, cls, 10_000, seed=1)
        details.append(f"{iid}:{got['violations']}")
        ok = ok and got["violations"] == 0
    report(6, "measure power law exact + decay 10^4 samples/instance", ok, t0,
           " ".join(details))


def test_criterion_7_dimension():
    """Shift survivor tree to depth 12: every expanded node >= 2 children,
    slope >= theorem bound - 0.05, bound > 0.9 log(alphabet - 1); the
    denominator-family tree at depth 10 lands within 10% of dimension 1."""
    t0 = time.time()
    inst = get_instance("shift3-periodic")
    est = dimension_lower_bound(inst, b=Fraction(3), depth=12, level_cap=40,
                                seed=5)
    ok_shift = (est.child_min >= 2
                and est.theoretical_bound > 0.9 * math.log(2)
                and est.empirical_slope >= est.theoretical_bound - 0.05)
    far = get_instance("farey-r1")
    est2 = dimension_lower_bound(far, b=Fraction(6), depth=10, level_cap=24,
                                 seed=6)
    ok_farey = (est2.child_min >= 2
                and abs(est2.empirical_slope - 1.0) <= 0.1
                and est2.empirical_slope >= est2.theoretical_bound - 0.05)
    ok = ok_shift and ok_farey and (time.time() - t0) < 600
    report(7, "dimension trees: shift depth 12, denominators depth 10", ok, t0,
           f"shift(slope={est.empirical_slope:.3f},bound={est.theoretical_bound:.3f}) "
           f"line(slope={est2.empirical_slope:.3f})")


def test_criterion_8_classic_reduction():
    """100 classic games wrapped from the strong strategy: both rule sets
    audit clean and the badness certificate passes; exact, under 2 min."""
    t0 = time.time()
    inst = get_instance("farey-r1")
    bad = []
    for seed in range(100):
        params = GameParams(variant="classic", b=Fraction(3), a=Fraction(3),
                            t1=Fraction(2), seed=seed)
        tr = new_game(inst, params).run(5)
        try:
            transcript_audit(tr, inst)
            audit_classic_as_weak(tr, inst)
        except Exception:
            bad.append(seed)
            continue
        outcome = psi_eval(inst.spec, tr.deepest)
        cert = badness_certificate(outcome, inst.family, inst.spec, tr.constant,
                                   default_horizon(tr))
        if not cert.verdict:
            bad.append(seed)
    ok = not bad and (time.time() - t0) < 120
    report(8, "classic reduction, 100 games dual-audited", ok, t0,
           f"bad_seeds={bad[:5]}")


def test_criterion_9_transport_and_interleaving():
    """Transported (x -> 2x+1) games certify against both the image family
    and the pulled-back original; two-family interleaved shift games pass
    both periodic-word certificates; exact, under 3 min."""
    t0 = time.time()
    far = get_instance("farey-r1")
    mapping = AffineMap(((Fraction(2),),), (Fraction(1),))
    samples = [FormalBall(Point.euclidean(Fraction(j, 7)), Fraction(j % 5))
               for j in range(1, 30)]
    moved, wit = transport_family(mapping, far.family, far.witness, far.spec,
                                  samples)
    inst = Instance(
        id="farey-r1-transported", support=far.support, spec=far.spec,
        families=(moved,), witness=wit, strategy_mode="strong",
        opening_box=((Fraction(1), Fraction(3)),), measure=far.measure,
        default_b=Fraction(4), default_rounds=6)
    bad = []
    for seed in range(10):
        tr = new_game(inst, GameParams(b=Fraction(4), seed=seed)).run(6)
        outcome = psi_eval(inst.spec, tr.deepest)
        cert = badness_certificate(outcome, moved, inst.spec, tr.constant,
                                   default_horizon(tr))
        # pull the outcome back through the map and certify the original
        y = tr.deepest.center.coords[0]
        x = mapping.apply_inverse((y,))[0]
        rad = inst.spec.radius(0, tr.deepest.t) * Fraction(1, 2)
        pre = Box(((Exact.of(x) - rad, Exact.of(x) + rad),))
        cert2 = badness_certificate(pre, far.family, far.spec, tr.constant,
                                    default_horizon(tr))
        if not (cert.verdict and cert2.verdict):
            bad.append(("transport", seed))
    # interleaved shift: periods "0" and "01" over 3 symbols
    f1 = PeriodicWordFamily([0], alphabet=3)
    f2 = PeriodicWordFamily([0, 1], alphabet=3)
    base = build_shift3_periodic()
    wit2 = DiffusenessWitness(strength="graded", b_star=base.witness.b_star,
                              n_star=2, provenance="interleave test")
    inst2 = Instance(
        id="shift3-interleaved", support=base.support, spec=base.spec,
        families=(f1, f2), witness=wit2, strategy_mode="interleaved",
        measure=base.measure, default_b=Fraction(3), default_rounds=40)
    for seed in range(10):
        g = new_game(inst2, GameParams(b=Fraction(3), seed=seed))
        tr = g.run(40)
        outcome = psi_eval(inst2.spec, tr.deepest)
        for fam in (f1, f2):
            cert = badness_certificate(outcome, fam, inst2.spec, tr.constant,
                                       default_horizon(tr))
            if not cert.verdict:
                bad.append(("interleave", seed, fam.period))
    ok = not bad and (time.time() - t0) < 180
    report(9, "transported and interleaved games certify", ok, t0,
           f"bad={bad[:4]}")
