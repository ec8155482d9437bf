"""End-to-end replay of the finite claims about T1..T4, the square diagram and
the two varieties. Each step returns a :class:`Step`; nothing is cached
between runs."""
from __future__ import annotations

import random
import time
from dataclasses import dataclass, field

from .certificate import EXPECTED, CertificateFailure, section7_certificate
from .congruence import con_lattice, is_boolean_lattice
from .diagram import verify_lifting
from .io import Fixtures
from .lattice import ValidationError, canonical_form, doubly_irreducible, find_isomorphism, length, maximal_sublattices
from .poset import (
    CapacityExhausted,
    FinitePoset,
    PosetError,
    build_tree_covering,
    check_compatibility,
    covering_isomorphism,
    extreme_ideals,
    finite_T_covering,
    monotone_hull,
    sigma_select,
)
from .variety import embedding_transfer


@dataclass
class Step:
    number: int
    title: str
    ok: bool
    details: dict = field(default_factory=dict)
    seconds: float = 0.0
    invalid: bool = False  # a fixture failed validation

    def line(self):
        tail = f" (invalid input: {self.details['error']})" if self.invalid else ""
        return f"[{'PASS' if self.ok else 'FAIL'}] {self.number}. {self.title}{tail}"


def _con_shape(L):
    C = con_lattice(L)
    k = is_boolean_lattice(C.as_semilattice())
    return len(C), k


def step_con_table(fx):
    want = {"T1": 1, "T2": 1, "T3": 1, "T4": 1, "S0": 4, "S1": 2, "S2": 2}
    got = {}
    for name in want:
        n, k = _con_shape(fx.lattice(name))
        got[name] = {"congruences": n, "boolean_rank": k}
    T4 = fx.lattice("T4")
    for rm in (("a1",), ("a2",), ("a1", "a2")):
        n, k = _con_shape(T4.without(*rm))
        key = "T4-{" + ",".join(rm) + "}"
        got[key] = {"congruences": n, "boolean_rank": k}
        want[key] = 2
    ok = all(got[k]["boolean_rank"] == r for k, r in want.items())
    return ok, got


def step_t1_structure(fx):
    T1 = fx.lattice("T1")
    dirr = sorted(doubly_irreducible(T1))
    maxi = maximal_sublattices(T1)
    removed = sorted(tuple(sorted(set(T1.ids) - set(S.ids))) for S in maxi)
    types = {}
    refs = {n: fx.lattice(n) for n in ("T2", "T3", "T4")}
    for S in maxi:
        r = ",".join(sorted(set(T1.ids) - set(S.ids)))
        types[r] = [n for n, R in refs.items() if find_isomorphism(S, R) is not None]
    six = [f"a{k}" for k in range(1, 7)]
    ok = dirr == six and removed == [(a,) for a in six] and all(len(v) == 1 for v in types.values())
    return ok, {"doubly_irreducible": dirr, "maximal_removed": [list(r) for r in removed], "isomorphic_to": types}


def step_lifting_v1(fx):
    xi = verify_lifting(fx.diagram("square"), fx.diagram("Dvec"))
    ok = xi is not None
    return ok, {"natural_iso": xi.as_record() if ok else None}


def step_census_v2(fx):
    V2 = fx.variety("V2")
    gens = {g.name: g for g in V2.generators}
    found = V2.simple_members(length_eq=4)
    want = []
    for name, rm in EXPECTED["simple_length4"]:
        if name not in gens:
            return False, {"error": f"{name} is not a generator of V2", "found_sizes": [L.n for L in found]}
        want.append(gens[name].without(*rm) if rm else gens[name])
    ok = sorted(canonical_form(L) for L in found) == sorted(canonical_form(L) for L in want)
    return ok, {"found_sizes": sorted(L.n for L in found), "expected_sizes": sorted(L.n for L in want)}


def step_certificate(fx):
    try:
        cert = section7_certificate(fx.variety("V2"), fx.diagram("Dvec"))
    except CertificateFailure as exc:
        return False, {"failed_step": exc.step, "error": str(exc), "trace": exc.trace}
    return True, cert.to_record()


def step_lower_bound(fx):
    V1, V2 = fx.variety("V1"), fx.variety("V2")
    fss, witness = V1.is_finitely_semisimple()
    rows = embedding_transfer(V1, V2)
    bad = [A.n for A, _, host in rows if host is None]
    ok = fss and not bad
    return ok, {"finitely_semisimple": fss, "non_simple_checked": len(rows), "without_host": bad,
                "counterexample_size": None if witness is None else witness.n}


def random_monotone_family(nc, rng, density=0.3):
    ext = extreme_ideals(nc)
    raw = {e.generator: {u for u in nc.U.ids if rng.random() < density} for e in ext}
    return monotone_hull(nc, raw)


def step_sigma(fx, trials=100, seed=0):
    tc = build_tree_covering(FinitePoset.chain(2), 3)
    iso = covering_isomorphism(tc, finite_T_covering(3))
    rng = random.Random(seed)
    trees = [
        build_tree_covering(FinitePoset.chain(3), 3),
        build_tree_covering(FinitePoset.from_covers(["r", "s", "t", "w"], [("r", "s"), ("s", "t"), ("s", "w")]), 2),
    ]
    compatible = exhausted = 0
    mismatch = []
    for k in range(trials):
        nc = trees[k % len(trees)]
        F = random_monotone_family(nc, rng, density=rng.choice([0.05, 0.15, 0.3]))
        saturated = _exclusion_saturates(nc, F)
        try:
            sigma = sigma_select(nc, F)
        except CapacityExhausted:
            exhausted += 1
            if not saturated:
                mismatch.append(k)
            continue
        if saturated or not check_compatibility(nc, F, sigma):
            mismatch.append(k)
        compatible += 1
    ok = iso is not None and not mismatch
    return ok, {"tree_covering_isomorphic_to_T3": iso is not None, "isomorphism": iso,
                "trials": trials, "compatible": compatible, "capacity_exhausted": exhausted, "mismatches": mismatch}


def _exclusion_saturates(nc, F):
    """Independent replay of the exclusion sets: walk the tree bottom-up,
    collect ``{w(t) : w ∈ F(x↾φ(s)), s < t}`` and report whether some node has
    every value below its capacity excluded."""
    T = nc.tree
    fns = {u: dict(nc.functions[u]) for u in nc.U.ids}
    nodes = sorted((T.ids[t] for t in T.non_minimal()), key=lambda t: (T.heights[T.index(t)], t))
    x = {}
    for t in nodes:
        below = [s for s in T.ids if s != t and T.le(s, t)]
        excluded = set()
        for s in below:
            key = nc.element({r: v for r, v in x.items() if T.le(r, s)})
            excluded |= {fns[w][t] for w in F.get(key, ()) if t in fns[w]}
        if excluded >= set(range(nc.capacity[t])):
            return True
        x[t] = min(set(range(nc.capacity[t])) - excluded)
    return False


STEPS = [
    (1, "congruence-lattice table", step_con_table),
    (2, "structure of T1", step_t1_structure),
    (3, "square diagram lifts the Boolean diagram in V1", step_lifting_v1),
    (4, "simple length-4 members of V2", step_census_v2),
    (5, "non-lifting certificate in V2", step_certificate),
    (6, "lower-bound hypotheses", step_lower_bound),
    (8, "sigma-selection", step_sigma),
]

CONCLUSION = ("crit(V1,V2) = ℵ1: lower bound by finitely-semisimple hypothesis checks, "
              "upper bound by non-lifting certificate")


def reproduce(fixtures=None):
    """Run every step; a validation error in a fixture stops the run there."""
    fx = fixtures if isinstance(fixtures, Fixtures) else Fixtures(fixtures)
    out = []
    for number, title, fn in STEPS:
        t = time.perf_counter()
        try:
            ok, details = fn(fx)
        except (ValidationError, PosetError) as exc:
            out.append(Step(number, title, False, {"error": str(exc)}, time.perf_counter() - t, invalid=True))
            break
        out.append(Step(number, title, ok, details, time.perf_counter() - t))
    return out, fx
