import random

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

import gen
from latlift.diagram import (
    DiagramError,
    LatDiagram,
    LiftBounds,
    Lifting,
    NoneWithinBounds,
    SemDiagram,
    apply_conc,
    bounded_lift_search,
    curry,
    finite_subdiagram_consistency,
    natural_iso,
    uncurry,
    verify_lifting,
)
from latlift.lattice import FiniteLattice, JoinSemilattice0, LatticeHom, direct_product, is_isomorphic
from latlift.poset import FinitePoset, product_poset
from latlift.variety import VarietySpec

prop = settings(max_examples=200, derandomize=True, deadline=None, database=None,
                suppress_health_check=list(HealthCheck))
seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)

TWO = FiniteLattice.chain(2)
S_TWO = JoinSemilattice0.of(TWO)
S_SQUARE = JoinSemilattice0.of(direct_product(TWO, TWO))
ONE = FiniteLattice.chain(1)


def single(L, kind=LatDiagram):
    return kind(FinitePoset.chain(1), {"0": L}, {})


def same_diagram(D1, D2):
    if D1.index != D2.index:
        return False
    P = D1.index
    for i in P.ids:
        if D1.node(i) != D2.node(i):
            return False
        for j in P.ids:
            if P.le(i, j) and D1.arrow(i, j).table != D2.arrow(i, j).table:
                return False
    return True


def swapped_legs(D):
    """The square with its two middle nodes exchanged."""
    swap = {"0": "0", "1": "2", "2": "1", "3": "3"}
    nodes = {i: D.node(swap[i]) for i in D.index.ids}
    edges = {(a, b): D.arrow(swap[a], swap[b]) for a, b in D.index.covers()}
    return SemDiagram(D.index, nodes, edges)


# construction

def test_non_commuting_square_rejected():
    P = FinitePoset.from_covers(list("0123"), [("0", "1"), ("0", "2"), ("1", "3"), ("2", "3")])
    C = FiniteLattice.chain(2)
    nodes = {i: C for i in P.ids}
    ident = LatticeHom.identity(C)
    const = LatticeHom(C, C, [1, 1], check=False)
    with pytest.raises(DiagramError, match="commute"):
        LatDiagram(P, nodes, {("0", "1"): ident, ("0", "2"): ident, ("1", "3"): ident, ("2", "3"): const})


def test_missing_edge_rejected():
    with pytest.raises(DiagramError, match="no edge"):
        LatDiagram(FinitePoset.chain(2), {"0": TWO, "1": TWO}, {})


# Con ∘ A

def test_apply_conc_constant_one(fx):
    A = LatDiagram(FinitePoset.chain(2), {"0": ONE, "1": ONE}, {("0", "1"): LatticeHom.identity(ONE)})
    C = apply_conc(A)
    assert all(C.node(i).n == 1 for i in C.index.ids)


def test_apply_conc_square_is_Dvec(fx):
    C = apply_conc(fx.diagram("square"))
    assert natural_iso(fx.diagram("Dvec"), C) is not None


def test_apply_conc_single_edge(fx):
    S1, T1 = fx.lattice("S1"), fx.lattice("T1")
    A = LatDiagram(FinitePoset.chain(2), {"0": S1, "1": T1}, {("0", "1"): LatticeHom.inclusion(S1, T1)})
    e = apply_conc(A).arrow("0", "1")
    assert e.source.n == 4 and e.target.n == 2 and e.is_surjective()


# natural isomorphisms

def test_natural_iso_identity(fx):
    D = fx.diagram("Dvec")
    xi = natural_iso(D, D)
    assert xi is not None and xi.is_natural()
    assert xi.compose(xi.inverse()).is_natural()


def test_natural_iso_swapped_legs(fx):
    D = fx.diagram("Dvec")
    E = swapped_legs(D)
    xi = natural_iso(D, E)
    assert xi is not None and xi.is_natural()
    # node 0 needs a nontrivial automorphism of 2^4
    assert xi.maps["0"].table != tuple(range(16))


def test_natural_iso_different_index():
    with pytest.raises(DiagramError):
        natural_iso(single(S_TWO, SemDiagram), SemDiagram(FinitePoset.chain(2), {"0": S_TWO, "1": S_TWO},
                                                           {("0", "1"): LatticeHom.identity(S_TWO, "semilattice")}))


# liftings

def test_square_lifts_Dvec(fx):
    xi = verify_lifting(fx.diagram("square"), fx.diagram("Dvec"))
    assert xi is not None and xi.is_natural()
    assert xi.maps["0"].source.n == 16 and xi.maps["0"].is_injective()


def test_single_node_liftings(fx):
    T1 = single(fx.lattice("T1"))
    assert verify_lifting(T1, single(S_TWO, SemDiagram)) is not None
    assert verify_lifting(T1, single(S_SQUARE, SemDiagram)) is None


def test_search_lifts_Dvec(fx, V1):
    D = fx.diagram("Dvec")
    res = bounded_lift_search(D, V1)
    assert isinstance(res, Lifting)
    assert verify_lifting(res.diagram, D) is not None
    assert {i: res.diagram.node(i).n for i in "0123"} == {"0": 5, "1": 9, "2": 11, "3": 13}


def test_search_with_square_pools(fx, V1):
    D = fx.diagram("Dvec")
    pools = {"0": [fx.lattice("S0")], "1": [fx.lattice("S1")], "2": [fx.lattice("S2")], "3": [fx.lattice("T1")]}
    res = bounded_lift_search(D, V1, pools=pools)
    assert isinstance(res, Lifting) and verify_lifting(res.diagram, D) is not None


def test_search_constant_one(fx, V2):
    res = bounded_lift_search(fx.diagram("const1"), V2)
    assert isinstance(res, Lifting)
    assert all(res.diagram.node(i).n == 1 for i in res.diagram.index.ids)


def test_search_single_two(V2):
    res = bounded_lift_search(single(S_TWO, SemDiagram), V2)
    assert isinstance(res, Lifting) and res.diagram.node("0").n == 2


def test_search_reports_bounds(fx, V2):
    res = bounded_lift_search(fx.diagram("Dvec"), V2, LiftBounds(max_size=6))
    assert isinstance(res, NoneWithinBounds)
    cert = res.certificate
    assert cert.kind == "bounded" and cert.bounds["max_size"] == 6
    assert not cert.pools_complete


def test_subdiagram_consistency(fx, V1):
    D = fx.diagram("Dvec")
    rep = finite_subdiagram_consistency(D, V1)
    assert rep["lifted"] and rep["consistent"]
    assert len(rep["subsets"]) == 6  # lower sets of the square, including the empty one
    assert rep["subsets"][0]["subset"] == []


def test_restricted_square_edge(fx):
    A, D = fx.diagram("square"), fx.diagram("Dvec")
    assert verify_lifting(A.restrict(["0", "1"]), D.restrict(["0", "1"])) is not None


# properties

def _random_lat_diagram(rng):
    I = gen.random_poset(rng, rng.randint(1, 4), p=0.5)
    return gen.random_chain_diagram(rng, I, max_len=4)


@prop
@given(seeds)
def test_conc_commutes_with_restriction(seed):
    rng = random.Random(seed)
    A = _random_lat_diagram(rng)
    low = rng.choice(A.index.lower_sets())
    ids = [A.index.ids[k] for k in sorted(low)]
    if not ids:
        return
    assert same_diagram(apply_conc(A.restrict(ids)), apply_conc(A).restrict(ids))


@prop
@given(seeds)
def test_conc_of_A_is_lifted_by_A(seed):
    rng = random.Random(seed)
    A = _random_lat_diagram(rng)
    xi = verify_lifting(A, apply_conc(A))
    assert xi is not None and xi.is_natural()


_HSP2 = VarietySpec([TWO])


@prop
@given(seeds)
def test_search_witness_verifies(seed):
    rng = random.Random(seed)
    A = _random_lat_diagram(rng)
    D = apply_conc(A)
    res = bounded_lift_search(D, _HSP2, LiftBounds(max_size=8, subdirect=True))
    if isinstance(res, Lifting):
        assert verify_lifting(res.diagram, D) is not None
        for i in D.index.ids:
            assert _HSP2.contains(res.diagram.node(i))


@prop
@given(seeds)
def test_curry_round_trip(seed):
    rng = random.Random(seed)
    I = gen.random_poset(rng, rng.randint(1, 3), p=0.5)
    J = gen.random_poset(rng, rng.randint(1, 3), p=0.5)
    PQ, _ = product_poset(I, J)
    D = gen.random_chain_diagram(rng, PQ, max_len=3, semilattice=rng.random() < 0.5)
    C = curry(D, I, J)
    assert all(t.is_natural() for t in C.arrows.values())
    assert same_diagram(uncurry(C), D)
