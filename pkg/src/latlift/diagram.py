"""Diagrams of finite lattices and (∨,0)-semilattices over finite posets."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

from .congruence import con_lattice, con_of_hom
from .lattice import (
    LatticeHom,
    ResourceExhausted,
    ValidationError,
    canonical_form,
    iter_homomorphisms,
    iter_isomorphisms,
    length,
)
from .poset import FinitePoset, product_poset


class DiagramError(ValidationError):
    pass


class Diagram:
    """A functor from a finite poset to finite lattices.

    ``edges`` maps cover pairs ``(i, j)`` of index ids to homomorphisms; all
    other arrows are derived as composites, and every pair of paths between
    the same endpoints must agree.
    """

    kind = "lattice"

    def __init__(self, index, nodes, edges, name=None):
        self.index = index
        self.nodes = {i: nodes[i] for i in index.ids}
        self.edges = dict(edges)
        self.name = name
        missing = [i for i in index.ids if i not in nodes]
        if missing:
            raise DiagramError(f"no node for {missing}")
        for (i, j), h in self.edges.items():
            if not index.le(i, j) or i == j:
                raise DiagramError(f"edge {i}->{j} does not follow the index order")
            if h.source != self.nodes[i] or h.target != self.nodes[j]:
                raise DiagramError(f"edge {i}->{j} has wrong domain or codomain")
            if h.kind != self.kind and not (self.kind == "semilattice" and h.kind == "lattice"):
                raise DiagramError(f"edge {i}->{j} is not a {self.kind} homomorphism")
            if not h.is_homomorphism():
                raise DiagramError(f"edge {i}->{j} is not a homomorphism")
        for a, b in index.covers():
            if (a, b) not in self.edges:
                raise DiagramError(f"no edge for cover {a}->{b}")
        self._arrows = self._derive_arrows()

    def _derive_arrows(self):
        P = self.index
        arrows = {}
        for jk in P.linear_extension():
            j = P.ids[jk]
            arrows[j, j] = LatticeHom.identity(self.nodes[j], kind=self.kind)
            for ik in P.lower_covers(jk):
                i = P.ids[ik]
                e = self.edges[i, j]
                for (k, i2), g in list(arrows.items()):
                    if i2 != i:
                        continue
                    h = e @ g
                    old = arrows.get((k, j))
                    if old is None:
                        arrows[k, j] = h
                    elif old.table != h.table:
                        raise DiagramError(f"paths {k}->{j} do not commute")
        for (i, j), h in self.edges.items():
            if arrows[i, j].table != h.table:
                raise DiagramError(f"edge {i}->{j} disagrees with the composite of covers")
        return arrows

    def node(self, i):
        return self.nodes[i]

    def arrow(self, i, j):
        return self._arrows[i, j]

    def cover_edges(self):
        return [(a, b) for a, b in self.index.covers()]

    def restrict(self, ids):
        """Full subdiagram on a subset of the index."""
        P = self.index
        keep = P.indices(ids)
        Q = P.subposet(keep)
        edges = {(a, b): self.arrow(a, b) for a, b in Q.covers()}
        return type(self)(Q, {i: self.nodes[i] for i in Q.ids}, edges, name=self.name)

    def __repr__(self):
        return f"<{type(self).__name__} {self.name or ''} over {self.index.n} nodes>"


class SemDiagram(Diagram):
    kind = "semilattice"


class LatDiagram(Diagram):
    kind = "lattice"


def separates_zero(h):
    """Only 0 is sent to 0."""
    return sum(1 for t in h.table if t == h.target.bottom) == 1 and h.table[h.source.bottom] == h.target.bottom


# ------------------------------------------------- natural transformations

@dataclass
class NaturalTransformation:
    source: Diagram
    target: Diagram
    maps: dict  # index id -> LatticeHom

    def is_natural(self):
        for i, j in self.source.cover_edges():
            lhs = self.target.arrow(i, j) @ self.maps[i]
            rhs = self.maps[j] @ self.source.arrow(i, j)
            if lhs.table != rhs.table:
                return False
        return True

    def compose(self, other):
        """``self ∘ other``."""
        return type(self)(other.source, self.target, {i: self.maps[i] @ other.maps[i] for i in self.maps})

    def as_record(self):
        return {i: h.as_dict() for i, h in sorted(self.maps.items())}


class NaturalIso(NaturalTransformation):
    def inverse(self):
        inv = {}
        for i, h in self.maps.items():
            t = [0] * h.target.n
            for a, b in enumerate(h.table):
                t[b] = a
            inv[i] = LatticeHom(h.target, h.source, t, kind=h.kind, check=False)
        return NaturalIso(self.target, self.source, inv)


def _same_index(D1, D2):
    if D1.index != D2.index:
        raise DiagramError("diagrams are over different index posets")


def natural_iso(D1, D2):
    """First natural isomorphism ``D1 -> D2`` found, or None."""
    _same_index(D1, D2)
    P = D1.index
    order = [P.ids[k] for k in P.linear_extension()]
    chosen = {}

    def rec(k):
        if k == len(order):
            return True
        j = order[k]
        A, B = D1.node(j), D2.node(j)
        lower = [P.ids[i] for i in P.lower_covers(P.index(j))]
        for t in iter_isomorphisms(A, B):
            ok = True
            for i in lower:
                # D2(i->j) ∘ ξ_i == ξ_j ∘ D1(i->j)
                left = D2.arrow(i, j).table
                xi = chosen[i].table
                right = D1.arrow(i, j).table
                if any(left[xi[a]] != t[right[a]] for a in range(len(xi))):
                    ok = False
                    break
            if ok:
                chosen[j] = LatticeHom(A, B, t, kind=D1.kind, check=False)
                if rec(k + 1):
                    return True
                del chosen[j]
        return False

    if rec(0):
        return NaturalIso(D1, D2, dict(chosen))
    return None


def apply_conc(A):
    """The semilattice diagram ``Con ∘ A``."""
    nodes = {i: con_lattice(L).as_semilattice() for i, L in A.nodes.items()}
    edges = {e: con_of_hom(h) for e, h in A.edges.items()}
    return SemDiagram(A.index, nodes, edges, name=f"Con∘{A.name}" if A.name else None)


def verify_lifting(A, D):
    """A natural isomorphism ``ξ: D -> Con ∘ A`` if ``A`` lifts ``D``, else None."""
    return natural_iso(D, apply_conc(A))


# ------------------------------------------------------ bounded search

@dataclass
class LiftBounds:
    max_size: int | None = None
    max_length: int | None = None
    subdirect: bool = False
    max_product: int = 512
    cap: int = 20000
    max_cases: int = 10 ** 6

    def as_dict(self):
        return dict(self.__dict__)


@dataclass
class NonLiftingCertificate:
    """Record of an exhaustive refutation. ``kind`` is ``"bounded"`` (valid
    relative to the listed pools) or ``"structural"``."""

    kind: str
    bounds: dict
    pools: dict = field(default_factory=dict)
    pools_complete: bool = True
    cases: list = field(default_factory=list)
    steps: list = field(default_factory=list)

    def to_record(self):
        return {
            "kind": self.kind,
            "bounds": self.bounds,
            "pools": self.pools,
            "pools_complete": self.pools_complete,
            "cases": self.cases,
            "steps": self.steps,
        }


@dataclass
class Lifting:
    diagram: LatDiagram
    xi: NaturalIso


@dataclass
class NoneWithinBounds:
    certificate: NonLiftingCertificate


def _pool_record(pool):
    return [{"name": L.name, "size": L.n, "length": length(L), "canon": canonical_form(L)[1].hex()} for L in pool]


def bounded_lift_search(D, spec, bounds=None, pools=None):
    """Search for a lifting of ``D`` in ``spec`` over candidate node pools.

    Returns :class:`Lifting` or :class:`NoneWithinBounds`; raises
    :class:`ResourceExhausted` when ``bounds.max_cases`` is hit.
    """
    from .variety import members_with_conc

    bounds = bounds or LiftBounds()
    P = D.index
    order = [P.ids[k] for k in P.linear_extension()]
    complete = True
    if pools is None:
        pools = {}
        for i in order:
            r = members_with_conc(spec, D.node(i), max_size=bounds.max_size, max_length=bounds.max_length,
                                  subdirect=bounds.subdirect, max_product=bounds.max_product, cap=bounds.cap)
            pools[i] = r.members
            complete = complete and r.complete
    cert = NonLiftingCertificate("bounded", bounds.as_dict(), {i: _pool_record(pools[i]) for i in order}, complete)
    if not order:
        return Lifting(LatDiagram(P, {}, {}), NaturalIso(D, D, {}))

    hom_cache = {}

    def homs_by_con(Ai, Aj, injective):
        key = (id(Ai), id(Aj), injective)
        if key not in hom_cache:
            table = {}
            for h in iter_homomorphisms(Ai, Aj, injective=injective):
                f = LatticeHom(Ai, Aj, h, check=False)
                table.setdefault(con_of_hom(f).table, []).append(f)
            hom_cache[key] = table
        return hom_cache[key]

    lower = {j: [P.ids[i] for i in P.lower_covers(P.index(j))] for j in order}
    below = {j: [P.ids[i] for i in range(P.n) if P.leq[i, P.index(j)] and P.ids[i] != j] for j in order}
    inj = {(i, j): separates_zero(D.arrow(i, j)) for j in order for i in lower[j]}
    nodes, xis, arrows = {}, {}, {}
    cases = [0]
    deepest = [0]

    def rec(k):
        if k == len(order):
            return True
        deepest[0] = max(deepest[0], k)
        j = order[k]
        for A in pools[j]:
            C = con_lattice(A).as_semilattice()
            for t in iter_isomorphisms(D.node(j), C):
                cases[0] += 1
                if cases[0] > bounds.max_cases:
                    raise ResourceExhausted(f"lifting search exceeded {bounds.max_cases} cases")
                xi_j = LatticeHom(D.node(j), C, t, kind="semilattice", check=False)
                options = []
                for i in lower[j]:
                    # Con h must equal ξ_j ∘ D(i->j) ∘ ξ_i⁻¹
                    xi_i = xis[i].table
                    e = D.arrow(i, j).table
                    want = [0] * len(xi_i)
                    for a in range(len(xi_i)):
                        want[xi_i[a]] = t[e[a]]
                    options.append(homs_by_con(nodes[i], A, inj[i, j]).get(tuple(want), []))
                for combo in product(*options):
                    new = _extend_arrows(arrows, j, A, lower[j], combo, below[j])
                    if new is None:
                        continue
                    nodes[j], xis[j] = A, xi_j
                    arrows.update(new)
                    if rec(k + 1):
                        return True
                    for key in new:
                        del arrows[key]
                    del nodes[j], xis[j]
        return False

    first = order[0]
    found = False
    for A in pools[first]:
        saved = pools[first]
        pools[first] = [A]
        before, deepest[0] = cases[0], 0
        try:
            found = rec(0)
        finally:
            pools[first] = saved
        if found:
            break
        cert.cases.append({"node": first, "candidate": A.name or f"<{A.n}>", "size": A.n,
                           "assignments_tried": cases[0] - before,
                           "refuted_at": order[deepest[0]] if deepest[0] < len(order) else None})
    if not found:
        return NoneWithinBounds(cert)
    edges = {(a, b): arrows[a, b] for a, b in P.covers()}
    A = LatDiagram(P, dict(nodes), edges, name="lifting")
    C = apply_conc(A)
    xi = NaturalIso(D, C, {i: LatticeHom(D.node(i), C.node(i), xis[i].table, kind="semilattice", check=False)
                          for i in order})
    return Lifting(A, xi)


def _extend_arrows(arrows, j, A, lower_j, homs, below_j):
    """Arrows into ``j`` induced by the chosen cover homomorphisms, or None if
    two paths disagree."""
    new = {(j, j): LatticeHom.identity(A)}
    for i, h in zip(lower_j, homs):
        for k in below_j:
            g = arrows.get((k, i))
            if g is None:
                continue
            comp = h @ g
            old = new.get((k, j))
            if old is None:
                new[k, j] = comp
            elif old.table != comp.table:
                return None
    return new


def finite_subdiagram_consistency(D, spec, bounds=None, result=None):
    """Restrict a found lifting to every lower subset of the index and check
    it still lifts the restricted diagram, and that an independent search on
    the restriction succeeds as well."""
    result = result or bounded_lift_search(D, spec, bounds)
    report = {"lifted": isinstance(result, Lifting), "subsets": []}
    if not isinstance(result, Lifting):
        return report
    P = D.index
    for low in P.lower_sets():
        ids = [P.ids[k] for k in sorted(low)]
        if not ids:
            report["subsets"].append({"subset": [], "restricted_witness": True, "search": True})
            continue
        Dr, Ar = D.restrict(ids), result.diagram.restrict(ids)
        witness = verify_lifting(Ar, Dr) is not None
        search = isinstance(bounded_lift_search(Dr, spec, bounds), Lifting)
        report["subsets"].append({"subset": ids, "restricted_witness": witness, "search": search})
    report["consistent"] = all(r["restricted_witness"] and r["search"] for r in report["subsets"])
    return report


# ------------------------------------------------------------- currying

@dataclass
class CurriedDiagram:
    """A diagram over ``I`` of diagrams over ``J`` with natural
    transformations along the covers of ``I``."""

    I: FinitePoset
    J: FinitePoset
    rows: dict  # i -> Diagram over J
    arrows: dict  # (i, i') cover -> NaturalTransformation


def curry(D, I, J):
    """Split a diagram over ``I × J`` (ids as built by ``product_poset``)."""
    PQ, pair = product_poset(I, J)
    if D.index != PQ:
        raise DiagramError("diagram is not indexed by the product poset")
    name = {v: k for k, v in pair.items()}
    cls = type(D)
    rows = {}
    for i in I.ids:
        nodes = {j: D.node(name[i, j]) for j in J.ids}
        edges = {(a, b): D.arrow(name[i, a], name[i, b]) for a, b in J.covers()}
        rows[i] = cls(J, nodes, edges)
    arrows = {}
    for a, b in I.covers():
        maps = {j: D.arrow(name[a, j], name[b, j]) for j in J.ids}
        arrows[a, b] = NaturalTransformation(rows[a], rows[b], maps)
    return CurriedDiagram(I, J, rows, arrows)


def uncurry(C):
    PQ, pair = product_poset(C.I, C.J)
    name = {v: k for k, v in pair.items()}
    cls = type(next(iter(C.rows.values()))) if C.rows else SemDiagram
    nodes = {name[i, j]: C.rows[i].node(j) for i in C.I.ids for j in C.J.ids}
    edges = {}
    for x, y in PQ.covers():
        (i, a), (i2, b) = pair[x], pair[y]
        edges[x, y] = C.rows[i].arrow(a, b) if i == i2 else C.arrows[i, i2].maps[a]
    return cls(PQ, nodes, edges)
