"""Bundled instances, their witness derivations, and TOML configuration.

Every witness constant is an exact rational obtained by rounding the
relevant logarithm outward, so the inequalities behind it keep holding.
Derivation routes:

* separation      -- pairwise-separated point members: local containment in
                     single points with depth log 2 - log(cbar), composed
                     with point-diffuseness and a separating constant.
* volume          -- rational vectors: small boxes trap all of R_k in one
                     affine hyperplane; composed with measure-decay
                     diffuseness against hyperplanes.
* family_decay    -- graded witness from a decay function f(b, s) with a
                     sub-exponential window count.

All constants surface in transcript headers for auditability.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Dict, Optional

from .engine import Instance
from .errors import InconsistentParams
from .exactnum import LogVal, _as_fraction, rational_lower, rational_upper
from .families import (
    HoroballFamily,
    PeriodicWordFamily,
    RationalFamily,
    ToralFamily,
)
from .geometry import (
    cantor_support,
    euclidean_support,
    shift_spec,
    shift_support,
    standard_spec,
    weighted_spec,
)
from .strategy import (
    DecaySpec,
    DiffusenessWitness,
    FamilyDecay,
    MeasureSpec,
    PowerLaw,
    SDiffuse,
    compose_diffuseness,
    decay_to_diffuse,
    separation_to_witness,
    uniformly_perfect_to_diffuse,
)

LOG2_UP = rational_upper(LogVal.log(2))          # 0.6932
LOG3_UP = rational_upper(LogVal.log(3))          # 1.0987
MARGIN = Fraction(1, 100)


def _frac(s) -> Fraction:
    if isinstance(s, Fraction):
        return s
    if isinstance(s, int):
        return Fraction(s)
    num, _, den = str(s).partition("/")
    return Fraction(int(num), int(den) if den else 1)


# --------------------------------------------------------------------------
# Builders
# --------------------------------------------------------------------------

def build_farey_r1() -> Instance:
    family = HoroballFamily(farey=True)
    # tangencies of disjoint horoballs are 2 e^-s apart: l* = log2 - log2 = 0;
    # the full line dodges a point obstacle once b exceeds log 3
    witness = separation_to_witness(cbar=2, beta=LOG3_UP + MARGIN, d_star=LOG3_UP)
    measure = MeasureSpec(
        kind="lebesgue", support=euclidean_support(1),
        decay=DecaySpec(delta=Fraction(1), c_delta=Fraction(1), collection="points"),
        power_law=PowerLaw("rational", Fraction(1), Fraction(2), Fraction(2)),
        d_star=LOG3_UP)
    return Instance(
        id="farey-r1",
        support=euclidean_support(1),
        spec=standard_spec(1, dim=1),
        families=(family,),
        witness=witness,
        strategy_mode="strong",
        opening_box=((Fraction(0), Fraction(1)),),
        measure=measure,
        default_b=Fraction(3),
        default_rounds=16,
        lc_depth=Fraction(0),
    )


def build_horoball_list_demo() -> Instance:
    # Ford radii for small q plus one extra non-Ford ball; pairwise disjoint
    entries = [
        (Fraction(0), Fraction(1, 2)),
        (Fraction(1), Fraction(1, 2)),
        (Fraction(1, 2), Fraction(1, 8)),
        (Fraction(1, 3), Fraction(1, 18)),
        (Fraction(2, 3), Fraction(1, 18)),
        (Fraction(1, 4), Fraction(1, 32)),
        (Fraction(3, 4), Fraction(1, 32)),
        (Fraction(7, 22), Fraction(1, 1000)),
    ]
    family = HoroballFamily(entries=entries)
    witness = separation_to_witness(cbar=2, beta=LOG3_UP + MARGIN, d_star=LOG3_UP)
    measure = MeasureSpec(
        kind="lebesgue", support=euclidean_support(1),
        decay=DecaySpec(delta=Fraction(1), c_delta=Fraction(1), collection="points"),
        power_law=PowerLaw("rational", Fraction(1), Fraction(2), Fraction(2)),
        d_star=LOG3_UP)
    return Instance(
        id="horoball-list-demo",
        support=euclidean_support(1),
        spec=standard_spec(1, dim=1),
        families=(family,),
        witness=witness,
        strategy_mode="strong",
        measure=measure,
        default_b=Fraction(3),
        default_rounds=12,
    )


def build_rational_weighted_r2() -> Instance:
    weights = (Fraction(2, 3), Fraction(1, 3))
    family = RationalFamily(2, weights=weights, offset="plain")
    d_star = rational_upper(LogVal.log(3).scale(Fraction(3, 4)))  # log3/(1+min r)
    delta = Fraction(4, 3)  # 1 + min r_i
    measure = MeasureSpec(
        kind="lebesgue", support=euclidean_support(2),
        decay=DecaySpec(delta=delta, c_delta=Fraction(2), collection="hyperplanes"),
        power_law=PowerLaw("rational", Fraction(3), Fraction(4), Fraction(4)),
        d_star=d_star)
    sd = decay_to_diffuse(measure, d_star)
    assert isinstance(sd, SDiffuse)
    l_star = rational_upper(LogVal.log(math.factorial(2) * 4)) + MARGIN  # log(n! 2^n)
    witness = compose_diffuseness(sd, d_star, l_star)
    return Instance(
        id="rational-weighted-r2",
        support=euclidean_support(2),
        spec=weighted_spec(weights, t_floor=Fraction(0)),
        families=(family,),
        witness=witness,
        strategy_mode="strong",
        opening_box=((Fraction(0), Fraction(1)), (Fraction(0), Fraction(1))),
        measure=measure,
        default_b=Fraction(11, 2),
        default_rounds=2,
        lc_depth=l_star,
    )


def build_cantor_times_rational() -> Instance:
    family = RationalFamily(1, weights=(Fraction(1),), offset="plain")
    beta_metric = uniformly_perfect_to_diffuse(LogVal.log(3))  # = log 16
    b_point = rational_upper(beta_metric.scale(Fraction(1, 2))) + MARGIN  # psi scale 2
    d_star = rational_upper(LogVal.log(3).scale(Fraction(1, 2)))
    l_star = rational_upper(LogVal.log(2)) + MARGIN
    sd = SDiffuse(b_star=b_point, collection="points", provenance="uniformly_perfect")
    witness = compose_diffuseness(sd, d_star, l_star)
    measure = MeasureSpec(
        kind="cantor", support=cantor_support(),
        decay=DecaySpec(delta=Fraction(5, 4), c_delta=Fraction(8), collection="points"),
        power_law=PowerLaw("logratio", (4, 3), Fraction(1, 2), Fraction(6)),
        d_star=d_star)
    return Instance(
        id="cantor-times-rational",
        support=cantor_support(),
        spec=weighted_spec((Fraction(1),), t_floor=Fraction(0)),
        families=(family,),
        witness=witness,
        strategy_mode="strong",
        opening_box=((Fraction(0), Fraction(1)),),
        measure=measure,
        default_b=Fraction(3),
        default_rounds=8,
        lc_depth=l_star,
    )


def build_shift3_periodic(period=(0, 1), alphabet=3, instance_id="shift3-periodic") -> Instance:
    family = PeriodicWordFamily(period, alphabet=alphabet)
    base = separation_to_witness(cbar=1, beta=Fraction(1), d_star=LOG3_UP)
    # shift heights are integers: round the witness constant up
    b_star_int = Fraction(math.ceil(base.b_star))
    witness = DiffusenessWitness(strength="strong", b_star=b_star_int,
                                 provenance=base.provenance + "; ceil to integer")
    measure = MeasureSpec(
        kind="shift_uniform", support=shift_support(alphabet),
        decay=DecaySpec(delta=Fraction(1), c_delta=Fraction(1), collection="points"),
        power_law=PowerLaw("log", alphabet, Fraction(1), Fraction(1)))
    return Instance(
        id=instance_id,
        support=shift_support(alphabet),
        spec=shift_spec(alphabet),
        families=(family,),
        witness=witness,
        strategy_mode="strong",
        measure=measure,
        default_b=Fraction(3),
        default_rounds=100,
    )


def build_toral_diag2(K=12) -> Instance:
    mats = [[[Fraction(2 ** k), Fraction(0)], [Fraction(0), Fraction(2 ** k)]]
            for k in range(1, K + 1)]
    family = ToralFamily(mats, taus=[Fraction(1)] * K, targets="integer_lattice",
                         phi=("lacunary", 2))
    measure = MeasureSpec(
        kind="lebesgue", support=euclidean_support(2),
        decay=DecaySpec(delta=Fraction(1), c_delta=Fraction(2), collection="hyperplanes"),
        family_decay=FamilyDecay(phi_kind="lacunary", phi_param=Fraction(2),
                                 delta=Fraction(1), c_delta=Fraction(2)),
        power_law=PowerLaw("rational", Fraction(2), Fraction(4), Fraction(4)),
        d_star=LOG3_UP)
    witness = decay_to_diffuse(measure, LOG3_UP)
    assert isinstance(witness, DiffusenessWitness)
    return Instance(
        id="toral-diag2",
        support=euclidean_support(2),
        spec=standard_spec(1, dim=2),
        families=(family,),
        witness=witness,
        strategy_mode="weak",
        opening_box=((Fraction(0), Fraction(1)), (Fraction(0), Fraction(1))),
        measure=measure,
        default_b=Fraction(9),
        default_rounds=3,
    )


BUILTIN = {
    "farey-r1": build_farey_r1,
    "rational-weighted-r2": build_rational_weighted_r2,
    "cantor-times-rational": build_cantor_times_rational,
    "shift3-periodic": build_shift3_periodic,
    "toral-diag2": build_toral_diag2,
    "horoball-list-demo": build_horoball_list_demo,
}

_cache: Dict[str, Instance] = {}


def get_instance(instance_id: str) -> Instance:
    if instance_id not in BUILTIN:
        raise InconsistentParams(f"unknown instance {instance_id!r}; "
                                 f"available: {sorted(BUILTIN)}")
    if instance_id not in _cache:
        _cache[instance_id] = BUILTIN[instance_id]()
    return _cache[instance_id]


def list_instances():
    return sorted(BUILTIN)


# --------------------------------------------------------------------------
# TOML configuration
# --------------------------------------------------------------------------

def load_config(path: str) -> Instance:
    """Instance from a config file; numbers are "p/q" strings throughout."""
    try:
        import tomllib as toml
    except ModuleNotFoundError:
        import tomli as toml
    with open(path, "rb") as fh:
        data = toml.load(fh)
    return instance_from_dict(data)


def instance_from_dict(data: dict) -> Instance:
    base = data.get("base")
    if base:
        inst = get_instance(base)
        game = data.get("game", {})
        return _override(inst, data.get("id", inst.id), game)
    kind = data["family"]["kind"]
    if kind == "horoball" and data["family"].get("farey"):
        inst = build_farey_r1()
    elif kind == "horoball":
        entries = [(_frac(x), _frac(r)) for x, r in data["family"]["entries"]]
        fam = HoroballFamily(entries=entries)
        proto = build_horoball_list_demo()
        inst = Instance(**{**proto.__dict__, "families": (fam,)})
    elif kind == "periodic_word":
        inst = build_shift3_periodic(
            period=tuple(data["family"]["period"]),
            alphabet=int(data["family"].get("alphabet", 3)))
    elif kind == "rational":
        dim = int(data["family"].get("dim", 2))
        if dim == 1:
            inst = build_cantor_times_rational() \
                if data.get("support", {}).get("kind") == "cantor" \
                else build_farey_r1()
        else:
            inst = build_rational_weighted_r2()
    elif kind == "toral":
        mats = [[[_frac(x) for x in row] for row in m]
                for m in data["family"]["mats"]]
        taus = [_frac(t) for t in data["family"]["taus"]]
        fam = ToralFamily(mats, taus=taus, targets=data["family"]
                          .get("targets", "integer_lattice"))
        proto = build_toral_diag2()
        inst = Instance(**{**proto.__dict__, "families": (fam,)})
    else:
        raise InconsistentParams(f"unknown family kind {kind!r}")
    return _override(inst, data.get("id", inst.id), data.get("game", {}))


def _override(inst: Instance, new_id: str, game: dict) -> Instance:
    fields = dict(inst.__dict__)
    fields["id"] = new_id
    if "b" in game:
        b = _frac(game["b"])
        if b < inst.witness.b_star:
            raise InconsistentParams(
                f"configured b = {b} violates b >= b* = {inst.witness.b_star}")
        fields["default_b"] = b
    if "rounds" in game:
        fields["default_rounds"] = int(game["rounds"])
    return Instance(**fields)
