"""Condensates of finite diagrams over finite norm-coverings.

For finite ``U`` every tuple has a support (``U`` itself is a kernel), so the
condensate is the full product ``∏_u A(|u|)``; what is tracked here is the
support structure on top of it.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product

import numpy as np

from .congruence import con_lattice, con_of_hom, kernel
from .lattice import LatticeHom, ValidationError, direct_product, projection
from .poset import Kernel, PosetError, extreme_ideals, is_kernel


class QuasiLiftingFailure(AssertionError):
    pass


class Condensate:
    def __init__(self, D, nc):
        if D.index != nc.I:
            raise ValidationError("covering is normed onto a different index poset")
        self.D = D
        self.nc = nc
        self.U = nc.U
        self.factors = [D.node(nc.norm[u]) for u in self.U.ids]
        self._lattice = None

    def __len__(self):
        n = 1
        for F in self.factors:
            n *= F.n
        return n

    # ---------------------------------------------------------- elements

    def _values(self, values):
        if isinstance(values, dict):
            return tuple(F.index(values[u]) for F, u in zip(self.factors, self.U.ids))
        return tuple(int(v) for v in values)

    def element(self, values, support=None):
        support = support or Kernel(self.U, frozenset(self.U.ids))
        return CondElement(self, self._values(values), support)

    def is_support(self, values, V):
        U, nc, D = self.U, self.nc, self.D
        for k, u in enumerate(U.ids):
            v = V.project(u)
            h = D.arrow(nc.norm[v], nc.norm[u])
            if h.table[values[U.index(v)]] != values[k]:
                return False
        return True

    def from_restriction(self, V, x):
        """Extend ``x`` on the kernel ``V`` by ``a_u = A(|V·u| ≤ |u|)(x(V·u))``."""
        U, nc, D = self.U, self.nc, self.D
        vals = []
        for u in U.ids:
            v = V.project(u)
            src = D.node(nc.norm[v])
            xv = x[v] if isinstance(x[v], int) else src.index(x[v])
            vals.append(D.arrow(nc.norm[v], nc.norm[u]).table[xv])
        return CondElement(self, tuple(vals), V)

    def elements(self, support=None):
        """All elements (with ``support`` as declared support when given,
        enumerating only tuples it supports)."""
        if support is None:
            for vals in product(*(range(F.n) for F in self.factors)):
                yield self.element(vals)
            return
        members = sorted(support.members, key=self.U.index)
        pos = {u: self.U.index(u) for u in members}
        for xs in product(*(range(self.factors[pos[v]].n) for v in members)):
            yield self.from_restriction(support, dict(zip(members, xs)))

    def join(self, a, b):
        vals = tuple(int(F.join[x, y]) for F, x, y in zip(self.factors, a.values, b.values))
        return CondElement(self, vals, _common_support(a.support, b.support))

    def meet(self, a, b):
        vals = tuple(int(F.meet[x, y]) for F, x, y in zip(self.factors, a.values, b.values))
        return CondElement(self, vals, _common_support(a.support, b.support))

    def zero(self):
        return self.element([F.bottom for F in self.factors])

    # ------------------------------------------------------ as a lattice

    def as_lattice(self):
        """The condensate as a direct product lattice (coordinates in ``U`` order)."""
        if self._lattice is None:
            self._lattice = direct_product(*self.factors, name="Cond")
            self._code = {c: k for k, c in enumerate(self._lattice.coords)}
        return self._lattice

    def lattice_index(self, a):
        self.as_lattice()
        return self._code[a.values]


def _common_support(V, W):
    """``V ∪ W`` when that is a kernel, else all of ``U`` (which supports every tuple)."""
    U = V.parent
    X = V.members | W.members
    return Kernel(U, X if is_kernel(U, X) else frozenset(U.ids))


@dataclass(frozen=True)
class CondElement:
    cond: Condensate = field(repr=False, compare=False)
    values: tuple
    support: Kernel = field(compare=False)

    def __post_init__(self):
        if not self.cond.is_support(self.values, self.support):
            raise PosetError(f"{sorted(self.support.members)} is not a support of {self.as_dict()}")

    def as_dict(self):
        return {u: F.ids[v] for u, F, v in zip(self.cond.U.ids, self.cond.factors, self.values)}

    def restrict(self, V=None):
        V = V or self.support
        return {v: self.cond.factors[self.cond.U.index(v)].ids[self.values[self.cond.U.index(v)]] for v in sorted(V.members)}

    def to_record(self):
        return {"support": sorted(self.support.members), "values": self.restrict()}


def element_from_record(cond, rec):
    V = Kernel(cond.U, frozenset(rec["support"]))
    return cond.from_restriction(V, rec["values"])


def is_support(a, V):
    return a.cond.is_support(a.values, V)


def smallest_support(a, limit=8):
    """Least kernel supporting ``a``; searched among sub-kernels of the declared one."""
    V = a.support
    if len(V) > limit:
        raise PosetError(f"declared support has {len(V)} > {limit} members")
    U = a.cond.U
    members = sorted(V.members, key=U.index)
    supports = []
    for r in range(1, len(members) + 1):
        for sub in combinations(members, r):
            if is_kernel(U, sub):
                W = Kernel(U, frozenset(sub))
                if is_support(a, W):
                    supports.append(W)
    least = frozenset.intersection(*(W.members for W in supports))
    W = Kernel(U, least)
    assert is_support(a, W) and all(least <= S.members for S in supports), "supports not closed under intersection"
    return W


def proj_u(a, u):
    """``a_u`` as an element id of ``A(|u|)``."""
    k = a.cond.U.index(u)
    return a.cond.factors[k].ids[a.values[k]]


def proj_ideal(a, ideal, V=None):
    """``A(|V·𝒖| ≤ |𝒖|)(a_{V·𝒖})`` for a support ``V`` of ``a`` (default: the declared one)."""
    V = V or a.support
    if not is_support(a, V):
        raise PosetError("not a support of the element")
    cond = a.cond
    v = V.project_ideal(ideal)
    h = cond.D.arrow(cond.nc.norm[v], ideal.norm)
    return h.target.ids[h.table[a.values[cond.U.index(v)]]]


# ------------------------------------------------------------ θ-ideals

@dataclass
class ThetaIdeal:
    """``{a : π_𝒖(a) = 0}``, stored by its largest element."""

    cond: Condensate
    ideal: object
    generator: tuple

    def __contains__(self, a):
        node = self.cond.D.node(self.ideal.norm)
        return proj_ideal(a, self.ideal) == node.ids[node.bottom]


def theta_ideal(cond, ideal):
    k = cond.U.index(ideal.generator)
    gen = tuple(F.bottom if i == k else F.top for i, F in enumerate(cond.factors))
    return ThetaIdeal(cond, ideal, gen)


def check_theta_ideal(cond, ideal):
    """Exhaustive: θ is a down-set closed under joins, equal to ``↓generator``,
    and ``c ↦ π_𝒖(c)`` maps ``↑generator`` isomorphically onto ``A(|𝒖|)``."""
    th = theta_ideal(cond, ideal)
    elems = list(cond.elements())
    inside = [a for a in elems if a in th]
    gen = cond.element(th.generator)
    le = lambda a, b: cond.join(a, b).values == b.values
    if {a.values for a in inside} != {a.values for a in elems if le(a, gen)}:
        return False
    for a in inside:
        for b in inside:
            if cond.join(a, b) not in th:
                return False
    target = cond.D.node(ideal.norm)
    up = [c for c in elems if le(gen, c)]
    image = [target.index(proj_ideal(c, ideal)) for c in up]
    if sorted(image) != list(range(target.n)):
        return False
    for c, x in zip(up, image):
        for d, y in zip(up, image):
            if le(c, d) != bool(target.leq[x, y]):
                return False
    return True


# --------------------------------------------------------------- functor

class CondMap:
    """``Cond(h⃗, U)``: apply ``h_{|u|}`` coordinatewise."""

    def __init__(self, h, source, target):
        self.h = h
        self.source = source
        self.target = target

    def __call__(self, a):
        nc = self.source.nc
        vals = tuple(self.h.maps[nc.norm[u]].table[x] for u, x in zip(self.source.U.ids, a.values))
        return CondElement(self.target, vals, a.support)

    def compose(self, other):
        from .diagram import NaturalTransformation

        return CondMap(NaturalTransformation(other.h.source, self.h.target,
                                             {i: self.h.maps[i] @ other.h.maps[i] for i in self.h.maps}),
                       other.source, self.target)

    def as_hom(self):
        S, T = self.source.as_lattice(), self.target.as_lattice()
        table = []
        for c in S.coords:
            a = CondElement(self.source, c, Kernel(self.source.U, frozenset(self.source.U.ids)))
            table.append(self.target.lattice_index(self(a)))
        return LatticeHom(S, T, table, check=False)


def cond_map(h, nc):
    return CondMap(h, Condensate(h.source, nc), Condensate(h.target, nc))


# ------------------------------------------------------------------- τ

@dataclass
class QuasiLiftingReport:
    tau: list  # Con Cond index -> tuple of Con A(|v|) indices
    ideals: list = field(default_factory=list)

    @property
    def ok(self):
        return all(r["iso"] for r in self.ideals)

    def to_record(self):
        return {"tau_size": len(self.tau), "ideals": self.ideals, "ok": self.ok}


def _tau_table(A, nc, cond=None):
    cond = cond or Condensate(A, nc)
    L = cond.as_lattice()
    CL = con_lattice(L)
    projs = [projection(L, k) for k in range(len(cond.factors))]
    con_p = [con_of_hom(p) for p in projs]
    return cond, CL, projs, [tuple(f.table[b] for f in con_p) for b in range(len(CL))]


def tau_naturality(h, nc):
    """Check ``τ^B ∘ Con Cond(h) = Cond(Con h) ∘ τ^A`` for a natural
    transformation ``h: A -> B`` of lattice diagrams; returns the failing
    congruence indices (empty when the square commutes)."""
    ca, cb = Condensate(h.source, nc), Condensate(h.target, nc)
    _, CA, _, ta = _tau_table(h.source, nc, ca)
    _, _, _, tb = _tau_table(h.target, nc, cb)
    H = con_of_hom(CondMap(h, ca, cb).as_hom())
    con_h = {i: con_of_hom(f) for i, f in h.maps.items()}
    norms = [nc.norm[u] for u in nc.U.ids]
    bad = []
    for b in range(len(CA)):
        rhs = tuple(con_h[i].table[x] for i, x in zip(norms, ta[b]))
        if tb[H.table[b]] != rhs:
            bad.append(b)
    return bad


def tau_map(A, nc, strict=True):
    """``τ(β) = ((Con p_v)(β))_{v ∈ U}`` with the quasi-lifting check at every
    extreme ideal."""
    from .diagram import apply_conc

    cond, CL, projs, tau = _tau_table(A, nc)
    # each coordinate Con p_v is a checked (∨,0)-homomorphism, and the
    # condensate of a finite covering is the full product, so τ preserves ∨ and 0
    T = np.array(tau, dtype=np.int64).reshape(len(CL), len(cond.factors))
    ccond = Condensate(apply_conc(A), nc)
    report = QuasiLiftingReport(tau)
    S = CL.as_semilattice()
    for ideal in extreme_ideals(nc):
        k = nc.U.index(ideal.generator)
        th = theta_ideal(ccond, ideal)
        z = th.generator
        # τ(β) ∈ θ_𝒖, read through the full support (where V·𝒖 is the generator)
        members = np.flatnonzero(T[:, k] == ccond.factors[k].bottom)
        alpha = int(members[0])
        for b in members[1:]:
            alpha = int(S.join[alpha, b])
        up = np.flatnonzero(S.leq[alpha])
        image = np.stack([F.join[T[up, j], z[j]] for j, F in enumerate(ccond.factors)], axis=1)
        up_z = set(product(*(np.flatnonzero(F.leq[z[j]]).tolist() for j, F in enumerate(ccond.factors))))
        rows = [tuple(int(x) for x in r) for r in image]
        iso = len(set(rows)) == len(rows) and set(rows) == up_z
        if iso:
            le = np.ones((len(up), len(up)), dtype=bool)
            for j, F in enumerate(ccond.factors):
                le &= F.leq[image[:, j][:, None], image[:, j][None, :]]
            iso = bool(np.array_equal(S.leq[np.ix_(up, up)], le))
        ker = CL.index(kernel(projs[k]))
        row = {"ideal": ideal.generator, "norm": ideal.norm, "alpha": alpha,
               "alpha_is_kernel_of_projection": alpha == ker, "iso": iso}
        report.ideals.append(row)
        if strict and not iso:
            raise QuasiLiftingFailure(f"no isomorphism at extreme ideal {ideal.generator}")
    return report
