import random

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

import gen
from latlift.congruence import (
    Congruence,
    HypothesisFailed,
    boolean_decomposition,
    con_lattice,
    con_of_hom,
    congruence_image,
    full_congruence,
    identity_congruence,
    is_boolean_lattice,
    is_simple,
    is_subdirectly_irreducible,
    kernel,
    malcev_entailment,
    meet_irreducible,
    principal_congruence,
    quotient,
)
from latlift.lattice import FiniteLattice, LatticeHom, all_sublattices, direct_product, is_isomorphic

prop = settings(max_examples=200, derandomize=True, deadline=None, database=None,
                suppress_health_check=list(HealthCheck))
seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)

TWO = FiniteLattice.chain(2)
SQUARE = direct_product(TWO, TWO)


def as_relations(C):
    return sorted(gen.relation_of(c).tobytes() for c in C)


# principal congruences

def test_principal_on_two_chain():
    assert principal_congruence(TWO, "0", "1").is_full()


def test_principal_on_square():
    th = principal_congruence(SQUARE, "(0,0)", "(1,0)")
    assert th.block_ids() == [["(0,0)", "(1,0)"], ["(0,1)", "(1,1)"]]


def test_T1_bot_a5_is_full(fx):
    assert principal_congruence(fx.lattice("T1"), "bot", "a5").is_full()


@pytest.mark.parametrize("name", ["S0", "T2", "N5"])
def test_principal_matches_relation_fixpoint(fx, name):
    L = fx.lattice(name)
    for a in range(L.n):
        for b in range(a + 1, L.n):
            got = gen.relation_of(principal_congruence(L, L.ids[a], L.ids[b]))
            assert (got == gen.brute_congruence(L, [(a, b)])).all()


# congruence lattices

def test_con_sizes(fx):
    assert len(con_lattice(fx.lattice("T1"))) == 2 and is_simple(fx.lattice("T1"))
    assert is_boolean_lattice(con_lattice(fx.lattice("S0")).as_semilattice()) == 4
    assert is_boolean_lattice(con_lattice(FiniteLattice.chain(3)).as_semilattice()) == 2


@pytest.mark.parametrize("name", ["S0", "N5", "B1", "B2"])
def test_con_matches_partition_enumeration(fx, name):
    L = fx.lattice(name)
    assert as_relations(con_lattice(L)) == sorted(R.tobytes() for R in gen.brute_congruences(L))


def test_con_of_product_matches_direct_route():
    P = direct_product(FiniteLattice.N5(), FiniteLattice.chain(3))
    via_factors = con_lattice(P)
    direct = con_lattice(direct_product(FiniteLattice.N5(), FiniteLattice.chain(3)), use_factors=False)
    assert len(via_factors) == len(direct) == 20
    assert [c.labels for c in via_factors] == [c.labels for c in direct]
    assert (via_factors.order == direct.order).all()
    S, T = via_factors.as_semilattice(), direct.as_semilattice()
    assert (S.join == T.join).all() and (S.meet == T.meet).all()


def test_canonical_order_ends():
    C = con_lattice(FiniteLattice.N5())
    assert C.zero == identity_congruence(C.lattice) and C.full == full_congruence(C.lattice)


def test_si_and_simple():
    N5 = FiniteLattice.N5()
    assert len(con_lattice(N5)) == 5
    assert is_subdirectly_irreducible(N5) and not is_simple(N5)
    assert not is_subdirectly_irreducible(SQUARE)
    assert not is_subdirectly_irreducible(FiniteLattice.chain(1))


# quotients

def test_quotient_by_identity_and_full(fx):
    L = fx.lattice("S1")
    Q, p = quotient(L, identity_congruence(L))
    assert is_isomorphic(Q, L) and p.is_injective()
    Q, p = quotient(L, full_congruence(L))
    assert Q.n == 1 and p.is_surjective()


def test_S1_quotient(fx):
    S1 = fx.lattice("S1")
    th = principal_congruence(S1, "bot", "a5")
    assert th.block_ids() == [["a1", "u"], ["a4", "v"], ["a5", "bot", "c", "p", "q"], ["a6"], ["top"]]
    Q, p = quotient(S1, th)
    assert Q.n == 5 and Q.check_tables() and is_simple(Q)
    assert kernel(p) == th and p.is_homomorphism()


# Con f

def test_con_of_identity(fx):
    S0 = fx.lattice("S0")
    f = con_of_hom(LatticeHom.identity(S0))
    assert list(f.table) == list(range(16))


def test_con_of_S1_into_T1(fx):
    S1, T1 = fx.lattice("S1"), fx.lattice("T1")
    f = con_of_hom(LatticeHom.inclusion(S1, T1))
    assert f.source.n == 4 and f.target.n == 2
    assert list(f.table) == [0, 1, 1, 1]


def test_con_of_S0_into_S1(fx):
    S0, S1 = fx.lattice("S0"), fx.lattice("S1")
    f = con_of_hom(LatticeHom.inclusion(S0, S1))
    assert f.source.n == 16 and f.target.n == 4
    assert f.is_surjective() and f.is_homomorphism()
    # separates zero
    assert [k for k in range(16) if f.table[k] == 0] == [0]


# Mal'cev witnesses

def test_malcev_trivial_cases(fx):
    L = fx.lattice("S0")
    w = malcev_entailment(L, ("a1", "a1"), [])
    assert w.chain == ("a1",)
    w = malcev_entailment(L, ("bot", "a1"), [("bot", "a1")])
    assert len(w.steps) == 1 and w.verify(L, [("bot", "a1")])


def test_malcev_incomparable_principals():
    assert malcev_entailment(SQUARE, ("(0,0)", "(0,1)"), [("(0,0)", "(1,0)")]) is None


def test_malcev_witness_on_T1(fx):
    T1 = fx.lattice("T1")
    w = malcev_entailment(T1, ("bot", "top"), [("bot", "a5")])
    assert w is not None and w.verify(T1, [("bot", "a5")])
    assert w.chain[0] == "bot" and w.chain[-1] == "top"


# Boolean decomposition

def test_simple_lattice_meet_irreducibles(fx):
    C = con_lattice(fx.lattice("T1"))
    assert meet_irreducible(C) == [C.zero]


def test_decomposition_of_S0(fx):
    S0 = fx.lattice("S0")
    C = con_lattice(S0)
    d = boolean_decomposition(S0, C.full)
    assert d.Q == meet_irreducible(C) and len(d.Q) == 4
    assert [len(F) for F in d.factors] == [1, 2, 2, 2, 2] and d.is_isomorphism
    # α = Δ lies below every θ, so Q is empty and the map is Con S0 -> Con(S0/Δ)
    d = boolean_decomposition(S0, C.zero)
    assert d.Q == [] and d.is_isomorphism


def test_decomposition_with_full_alpha():
    d = boolean_decomposition(SQUARE, full_congruence(SQUARE))
    assert len(d.Q) == 2
    assert len(d.factors[0]) == 1
    assert d.is_isomorphism


def test_decomposition_hypothesis_failure():
    # N5 has a meet-irreducible congruence whose quotient is N5/θ ≅ 3-chain, not simple
    N5 = FiniteLattice.N5()
    with pytest.raises(HypothesisFailed):
        boolean_decomposition(N5, full_congruence(N5))


# properties

@prop
@given(seeds)
def test_con_of_hom_respects_composition(seed):
    rng = random.Random(seed)
    L = gen.random_lattice(rng, max_size=9, universe=4)
    subs = all_sublattices(L)
    K = rng.choice(subs)
    C = con_lattice(L)
    theta = C[rng.randrange(len(C))]
    f = LatticeHom.inclusion(K, L)
    _, g = quotient(L, theta)
    left = con_of_hom(g @ f)
    right = con_of_hom(g) @ con_of_hom(f)
    assert list(left.table) == list(right.table)


@prop
@given(seeds)
def test_congruence_image_is_generated_congruence(seed):
    rng = random.Random(seed)
    A = gen.random_lattice(rng, max_size=6, universe=3)
    B = gen.random_lattice(rng, max_size=4, universe=3)
    P = direct_product(B, B) if rng.random() < 0.5 else B
    homs = [LatticeHom(A, P, t, check=False) for t in _some_maps(rng, A, P)]
    homs = [h for h in homs if h.is_homomorphism()]
    CA = con_lattice(A)
    for h in homs:
        for alpha in CA:
            pairs = [(int(h.table[a]), int(h.table[b])) for a, b in alpha.representatives()]
            want = gen.brute_congruence(P, pairs)
            assert (gen.relation_of(congruence_image(h, alpha)) == want).all()


def _some_maps(rng, A, P):
    # constant maps are always homomorphisms; add random monotone candidates
    out = [[rng.randrange(P.n)] * A.n]
    for _ in range(20):
        out.append([rng.randrange(P.n) for _ in range(A.n)])
    return out


@prop
@given(seeds)
def test_decomposition_is_iso_when_hypothesis_holds(seed):
    rng = random.Random(seed)
    L = gen.random_lattice(rng, max_size=10)
    C = con_lattice(L)
    alpha = C[rng.randrange(len(C))]
    try:
        d = boolean_decomposition(L, alpha)
    except HypothesisFailed:
        return
    assert d.is_isomorphism
    assert len(set(d.table)) == len(C)
