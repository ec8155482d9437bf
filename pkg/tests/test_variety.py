import random

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from latlift.congruence import con_lattice, quotient
from latlift.io import Fixtures
from latlift.lattice import (
    FiniteLattice,
    JoinSemilattice0,
    all_sublattices,
    direct_product,
    find_isomorphism,
    is_isomorphic,
    length,
)
from latlift.variety import VarietySpec, embedding_transfer, members_with_conc

prop = settings(max_examples=200, derandomize=True, deadline=None, database=None,
                suppress_health_check=list(HealthCheck))
seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)

TWO = FiniteLattice.chain(2)
S_TWO = JoinSemilattice0.of(TWO)
S_SQUARE = JoinSemilattice0.of(direct_product(TWO, TWO))


def sizes(Ls):
    return sorted(L.n for L in Ls)


def test_si_of_small_varieties():
    assert sizes(VarietySpec([TWO]).si_members()) == [2]
    assert sizes(VarietySpec([direct_product(TWO, TWO)]).si_members()) == [2]


def test_simple_length_four_members_of_V2(fx, V2):
    got = V2.simple_members(length_eq=4)
    want = [fx.lattice("T2"), fx.lattice("T3"), fx.lattice("T4"), fx.lattice("T4").without("a4")]
    assert len(got) == 4
    for W in want:
        assert sum(is_isomorphic(W, G) for G in got) == 1


def test_contains(fx, V1, V2):
    assert not V2.contains(fx.lattice("T1"))
    assert V1.contains(fx.lattice("S0"))
    assert V1.contains(TWO) and V2.contains(TWO)
    assert V1.contains(direct_product(TWO))


def test_finitely_semisimple(fx, V1):
    assert V1.is_finitely_semisimple() == (True, None)
    assert VarietySpec([TWO]).is_finitely_semisimple() == (True, None)
    assert VarietySpec([FiniteLattice.chain(3)]).is_finitely_semisimple() == (True, None)
    ok, witness = VarietySpec([fx.lattice("N5")]).is_finitely_semisimple()
    assert not ok and is_isomorphic(witness, FiniteLattice.N5())


def test_members_with_conc_two_length_four(V2):
    res = members_with_conc(V2, S_TWO, exact_length=4)
    assert res.complete
    assert sizes(res) == sizes(V2.simple_members(length_eq=4)) == [11, 12, 12, 12]


def test_members_with_conc_trivial(V2):
    one = JoinSemilattice0.of(FiniteLattice.chain(1))
    res = members_with_conc(V2, one)
    assert res.complete and sizes(res) == [1]


def test_members_with_conc_square(fx, V2):
    res = members_with_conc(V2, S_SQUARE, max_size=12, subdirect=False)
    assert not res.complete
    assert any(is_isomorphic(A, fx.lattice("T2").without("a6")) for A in res)
    for A in res:
        assert A.n <= 12 and V2.contains(A)
        assert find_isomorphism(con_lattice(A).as_semilattice(), S_SQUARE) is not None


def test_members_with_conc_subdirect_phase():
    # in HSP(2) lattices with Con ≅ 2^2 (the 3-chain and 2x2) only arise as subdirect products
    V = VarietySpec([TWO])
    assert sizes(members_with_conc(V, S_SQUARE, subdirect=False)) == []
    res = members_with_conc(V, S_SQUARE)
    assert res.complete and sizes(res) == [3, 4]


def test_embedding_hypothesis(V1, V2):
    rows = embedding_transfer(V1, V2)
    assert rows and all(host2 is not None for _, _, host2 in rows)


def test_cache_round_trip(tmp_path, V2):
    V2.save_cache(tmp_path, provenance={"source": "test"})
    fresh = VarietySpec(V2.generators)
    index = fresh.load_cache(tmp_path)
    assert index["provenance"] == {"source": "test"}
    assert sizes(fresh.si_members()) == sizes(V2.si_members())
    assert all(e["size"] <= 12 for e in index["si"])


def test_si_members_are_members(V1, V2):
    for V in (V1, V2):
        assert all(V.contains(L) for L in V.si_members())


_V2 = None


def _v2():
    global _V2
    if _V2 is None:
        _V2 = Fixtures().variety("V2")
    return _V2


@prop
@given(seeds)
def test_membership_closed_under_H_S_P(seed):
    rng = random.Random(seed)
    V = _v2()
    G = rng.choice(V.generators)
    subs = all_sublattices(G, max_size=6)
    A, B = rng.choice(subs), rng.choice(subs)
    assert V.contains(A)
    C = con_lattice(A)
    assert V.contains(quotient(A, C[rng.randrange(len(C))])[0])
    inner = all_sublattices(A)
    assert V.contains(rng.choice(inner))
    P = direct_product(A, B)
    assert V.contains(P) and length(P) == length(A) + length(B)
