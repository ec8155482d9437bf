"""Congruences of finite lattices."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from itertools import product

import numpy as np

from .lattice import (
    FiniteLattice,
    JoinSemilattice0,
    LatticeHom,
    ResourceExhausted,
    find_isomorphism,
)
from .poset import FinitePoset


class HypothesisFailed(ValueError):
    pass


def _normalize(labels):
    seen = {}
    return tuple(seen.setdefault(int(l), len(seen)) for l in labels)


class Congruence:
    """A partition of a lattice's carrier, stored as normalized block labels."""

    __slots__ = ("lattice", "labels", "_hash")

    def __init__(self, lattice, labels):
        self.lattice = lattice
        self.labels = _normalize(labels)
        self._hash = hash(self.labels)

    def __eq__(self, other):
        return isinstance(other, Congruence) and self.labels == other.labels

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Congruence({self.to_record()})"

    @property
    def nblocks(self):
        return max(self.labels) + 1

    def blocks(self):
        out = [[] for _ in range(self.nblocks)]
        for i, l in enumerate(self.labels):
            out[l].append(i)
        return out

    def block_ids(self):
        ids = self.lattice.ids
        return sorted(sorted(ids[i] for i in b) for b in self.blocks())

    def to_record(self):
        return self.block_ids()

    def related(self, x, y):
        L = self.lattice
        if isinstance(x, str):
            x, y = L.index(x), L.index(y)
        return self.labels[x] == self.labels[y]

    def is_identity(self):
        return self.nblocks == len(self.labels)

    def is_full(self):
        return self.nblocks == 1

    def __le__(self, other):
        m = {}
        for a, b in zip(self.labels, other.labels):
            if m.setdefault(a, b) != b:
                return False
        return True

    def __and__(self, other):
        k = other.nblocks
        return Congruence(self.lattice, [a * k + b for a, b in zip(self.labels, other.labels)])

    def __or__(self, other):
        n = len(self.labels)
        parent = list(range(n))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for lab in (self.labels, other.labels):
            first = {}
            for i, l in enumerate(lab):
                r = first.setdefault(l, i)
                if r != i:
                    ra, rb = find(i), find(r)
                    if ra != rb:
                        parent[ra] = rb
        return Congruence(self.lattice, [find(i) for i in range(n)])

    def representatives(self):
        """Pairs ``(x, rep(x))`` generating the congruence as an equivalence."""
        first = {}
        out = []
        for i, l in enumerate(self.labels):
            r = first.setdefault(l, i)
            if r != i:
                out.append((i, r))
        return out


def identity_congruence(L):
    return Congruence(L, range(L.n))


def full_congruence(L):
    return Congruence(L, [0] * L.n)


def is_congruence(L, labels):
    lab = np.asarray(labels)
    for i in range(L.n):
        for j in range(L.n):
            if lab[i] == lab[j]:
                if not (np.array_equal(lab[L.meet[i]], lab[L.meet[j]]) and np.array_equal(lab[L.join[i]], lab[L.join[j]])):
                    return False
    return True


def _closure(L, pairs, track=False):
    """Union-find closure of ``pairs`` under all translations x -> x^t, x -> x v t.

    Only pairs that merge two classes are expanded. With ``track`` the merging
    edges are returned with their derivation.
    """
    M, J = L._tables_list
    n = L.n
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    queue = deque((a, b, ("gen", k)) for k, (a, b) in enumerate(pairs))
    edges = []
    while queue:
        a, b, why = queue.popleft()
        ra, rb = find(a), find(b)
        if ra == rb:
            continue
        parent[ra] = rb
        e = len(edges)
        edges.append((a, b, why))
        Ma, Mb, Ja, Jb = M[a], M[b], J[a], J[b]
        for t in range(n):
            if Ma[t] != Mb[t]:
                queue.append((Ma[t], Mb[t], ("meet", t, e)))
            if Ja[t] != Jb[t]:
                queue.append((Ja[t], Jb[t], ("join", t, e)))
    labels = [find(i) for i in range(n)]
    return (labels, edges) if track else labels


def generated_congruence(L, pairs):
    pairs = [(L.index(a), L.index(b)) if isinstance(a, str) else (int(a), int(b)) for a, b in pairs]
    return Congruence(L, _closure(L, pairs))


def principal_congruence(L, a, b):
    return generated_congruence(L, [(a, b)])


# ---------------------------------------------------------- Mal'cev chains

@dataclass(frozen=True)
class MalcevStep:
    pair: int  # index into the hypothesis pairs
    translations: tuple  # (("meet" | "join", t), ...) innermost first
    swapped: bool


@dataclass(frozen=True)
class MalcevWitness:
    """A chain ``x = w_0, ..., w_k = y`` where each link is ``{p(x_i), p(y_i)}``
    for a composite ``p`` of translations. ``len(chain) == 1`` iff ``x == y``.
    """

    x: str
    y: str
    chain: tuple
    steps: tuple

    def verify(self, L, pairs):
        M, J = L._tables_list
        if self.chain[0] != self.x or self.chain[-1] != self.y or len(self.chain) != len(self.steps) + 1:
            return False
        for k, st in enumerate(self.steps):
            a, b = (L.index(v) for v in pairs[st.pair])
            for op, t in st.translations:
                tab = M if op == "meet" else J
                ti = L.index(t)
                a, b = tab[a][ti], tab[b][ti]
            if st.swapped:
                a, b = b, a
            if (L.ids[a], L.ids[b]) != (self.chain[k], self.chain[k + 1]):
                return False
        return True


def malcev_entailment(L, target, pairs):
    """Witness that ``Θ(x,y) <= ⋁ Θ(x_i,y_i)``, or None when it fails."""
    x, y = target
    pairs = list(pairs)
    xi, yi = L.index(x), L.index(y)
    if xi == yi:
        return MalcevWitness(x, y, (x,), ())
    idx_pairs = [(L.index(a), L.index(b)) for a, b in pairs]
    labels, edges = _closure(L, idx_pairs, track=True)
    if labels[xi] != labels[yi]:
        return None
    adj = {}
    for e, (a, b, _) in enumerate(edges):
        adj.setdefault(a, []).append((b, e, False))
        adj.setdefault(b, []).append((a, e, True))
    prev = {xi: None}
    dq = deque([xi])
    while dq:
        v = dq.popleft()
        if v == yi:
            break
        for w, e, rev in adj.get(v, ()):
            if w not in prev:
                prev[w] = (v, e, rev)
                dq.append(w)
    path = []
    v = yi
    while prev[v] is not None:
        u, e, rev = prev[v]
        path.append((u, v, e, rev))
        v = u
    path.reverse()

    def derivation(e):
        trans = []
        while True:
            why = edges[e][2]
            if why[0] == "gen":
                return why[1], tuple(reversed(trans))
            trans.append((why[0], L.ids[why[1]]))
            e = why[2]

    chain = [x]
    steps = []
    for u, v, e, rev in path:
        k, trans = derivation(e)
        steps.append(MalcevStep(k, trans, rev))
        chain.append(L.ids[v])
    return MalcevWitness(x, y, tuple(chain), tuple(steps))


# ------------------------------------------------------- congruence lattice

class ConLattice:
    """All congruences of a finite lattice, in canonical order (Δ first, ∇ last)."""

    def __init__(self, lattice, congruences, order=None, tables=None):
        self.lattice = lattice
        if order is None:
            congruences = sorted(congruences, key=lambda c: (-c.nblocks, c.labels))
            order = np.array([[a <= b for b in congruences] for a in congruences], dtype=bool)
        self.congruences = list(congruences)
        self._index = {c: k for k, c in enumerate(self.congruences)}
        self.order = order
        # (meet, join) index tables when already known (product route)
        self._tables = tables
        self._semilattice = None

    def __len__(self):
        return len(self.congruences)

    def __iter__(self):
        return iter(self.congruences)

    def __getitem__(self, k):
        return self.congruences[k]

    def index(self, c):
        return self._index[c]

    @property
    def zero(self):
        return self.congruences[0]

    @property
    def full(self):
        return self.congruences[-1]

    def ids(self):
        width = len(str(len(self) - 1))
        return [f"c{k:0{width}d}" for k in range(len(self))]

    def as_semilattice(self):
        """The congruence lattice as a (∨,0)-semilattice with ids ``c0, c1, ...``."""
        if self._semilattice is None:
            m = len(self)
            ids = self.ids()
            P = FinitePoset(ids, self.order, check=False)
            if self._tables is not None:
                meet, join = self._tables
            else:
                join = np.zeros((m, m), dtype=np.int64)
                meet = np.zeros((m, m), dtype=np.int64)
                for a in range(m):
                    for b in range(a, m):
                        ca, cb = self.congruences[a], self.congruences[b]
                        join[a, b] = join[b, a] = self._index[ca | cb]
                        meet[a, b] = meet[b, a] = self._index[ca & cb]
            name = f"Con({self.lattice.name})" if self.lattice.name else None
            self._semilattice = JoinSemilattice0(P, meet, join, name=name)
        return self._semilattice

    def upper_covers(self, k):
        S = self.as_semilattice()
        return list(S.upper_covers(k))


def _factor_con_lattice(L, cap):
    """Con of a direct product as the product of the factors' Con lattices.

    Lattices have no skew congruences, so this is exact for lattices. Order,
    meet and join come from the factor tables coordinatewise.
    """
    fcs = [con_lattice(F) for F in L.factors]
    sizes = [len(C) for C in fcs]
    total = int(np.prod(sizes))
    if total > cap:
        raise ResourceExhausted(f"more than {cap} congruences")
    combos = np.array(list(product(*(range(k) for k in sizes))), dtype=np.int64).reshape(total, len(fcs))
    coords = np.array(L.coords, dtype=np.int64)
    congs = []
    for row in combos:
        lab = np.zeros(L.n, dtype=np.int64)
        for k, c in enumerate(row):
            cong = fcs[k][int(c)]
            lab = lab * (cong.nblocks + 1) + np.asarray(cong.labels)[coords[:, k]]
        congs.append(Congruence(L, lab))
    perm = sorted(range(total), key=lambda i: (-congs[i].nblocks, congs[i].labels))
    combos = combos[perm]
    congs = [congs[i] for i in perm]
    strides = np.cumprod([1] + sizes[::-1])[:-1][::-1]
    pos = np.empty(total, dtype=np.int64)
    pos[combos @ strides] = np.arange(total)
    order = np.ones((total, total), dtype=bool)
    mcode = np.zeros((total, total), dtype=np.int64)
    jcode = np.zeros((total, total), dtype=np.int64)
    for k, C in enumerate(fcs):
        S = C.as_semilattice()
        a, b = combos[:, k][:, None], combos[:, k][None, :]
        order &= C.order[a, b]
        mcode += S.meet[a, b] * strides[k]
        jcode += S.join[a, b] * strides[k]
    return ConLattice(L, congs, order=order, tables=(pos[mcode], pos[jcode]))


def con_lattice(L, cap=2 ** 16, use_factors=True):
    cached = L.__dict__.get("_con")
    if cached is not None:
        return cached
    if use_factors and L.factors:
        result = _factor_con_lattice(L, cap)
    else:
        principals = []
        seen = set()
        for a, b in L.cover_pairs():
            c = Congruence(L, _closure(L, [(a, b)]))
            if c not in seen:
                seen.add(c)
                principals.append(c)
        zero = identity_congruence(L)
        found = {zero}
        frontier = [zero]
        while frontier:
            new = []
            for c in frontier:
                for p in principals:
                    d = c | p
                    if d not in found:
                        found.add(d)
                        new.append(d)
                        if len(found) > cap:
                            raise ResourceExhausted(f"more than {cap} congruences", partial=list(found))
            frontier = new
        result = ConLattice(L, found)
    L._con = result
    return result


def is_simple(L):
    return len(con_lattice(L)) == 2


def is_subdirectly_irreducible(L):
    """Con L has a least nonzero element (a monolith)."""
    C = con_lattice(L)
    if len(C) < 2:
        return False
    S = C.as_semilattice()
    return len(S.upper_covers(S.bottom)) == 1


def meet_irreducible(C):
    """Completely meet-irreducible congruences: exactly one upper cover."""
    S = C.as_semilattice()
    return [C[k] for k in range(len(C)) if len(S.upper_covers(k)) == 1]


# --------------------------------------------------------------- quotients

def quotient(L, theta):
    """``L/θ`` with blocks named after their least element, and the projection."""
    blocks = theta.blocks()
    # blocks of lattice congruences are intervals, so the meet is the least element
    reps = [_block_min(L, b) for b in blocks]
    lab = theta.labels
    ids = [L.ids[r] for r in reps]
    k = len(blocks)
    leq = np.zeros((k, k), dtype=bool)
    meet = np.zeros((k, k), dtype=np.int64)
    join = np.zeros((k, k), dtype=np.int64)
    for a in range(k):
        for b in range(k):
            meet[a, b] = lab[L.meet[reps[a], reps[b]]]
            join[a, b] = lab[L.join[reps[a], reps[b]]]
            leq[a, b] = meet[a, b] == a
    P = FinitePoset(ids, leq, check=False)
    pos = np.array([P.index(x) for x in ids])
    inv = np.argsort(pos)
    Q = FiniteLattice(P, pos[meet][np.ix_(inv, inv)], pos[join][np.ix_(inv, inv)],
                      name=f"{L.name}/θ" if L.name else None)
    proj = LatticeHom(L, Q, [pos[lab[i]] for i in range(L.n)], check=False)
    return Q, proj


def _block_min(L, block):
    m = block[0]
    for i in block[1:]:
        m = L.meet[m, i]
    return int(m)


def kernel(f):
    return Congruence(f.source, f.table)


# ---------------------------------------------------------------- Con f

def congruence_image(f, alpha):
    """``Θ_B({(f(x), f(y)) : x α y})``."""
    pairs = [(f.table[a], f.table[b]) for a, b in alpha.representatives()]
    B = f.target
    if not B.factors:
        return Congruence(B, _closure(B, pairs))
    # in a product the generated congruence is generated coordinatewise
    coords = np.array(B.coords, dtype=np.int64)
    lab = np.zeros(B.n, dtype=np.int64)
    for k, F in enumerate(B.factors):
        c = Congruence(F, _closure(F, [(int(coords[a, k]), int(coords[b, k])) for a, b in pairs]))
        lab = lab * (c.nblocks + 1) + np.asarray(c.labels)[coords[:, k]]
    return Congruence(B, lab)


def con_of_hom(f):
    """``Con f`` as a (∨,0)-homomorphism between the congruence semilattices."""
    CA, CB = con_lattice(f.source), con_lattice(f.target)
    table = [CB.index(congruence_image(f, a)) for a in CA]
    return LatticeHom(CA.as_semilattice(), CB.as_semilattice(), table, kind="semilattice")


def preimage(f, beta):
    """``f⁻¹(β)`` as a congruence of the source."""
    return Congruence(f.source, [beta.labels[t] for t in f.table])


# ------------------------------------------------------ Boolean decomposition

@dataclass
class BooleanDecomposition:
    alpha: Congruence
    Q: list
    factors: list  # ConLattice of L/α, then of L/θ for θ in Q
    table: list  # Con L index -> tuple of factor indices
    is_isomorphism: bool


def boolean_decomposition(L, alpha):
    """Canonical map ``Con L -> Con(L/α) × ∏_{θ∈Q} Con(L/θ)``.

    ``Q`` is the set of completely meet-irreducible θ with ``α ≰ θ``; every
    ``L/θ`` for θ in Q must be simple, otherwise :class:`HypothesisFailed`.
    """
    C = con_lattice(L)
    Q = [t for t in meet_irreducible(C) if not alpha <= t]
    projs = []
    for theta in [alpha] + Q:
        Qt, p = quotient(L, theta)
        projs.append(p)
    for theta, p in zip(Q, projs[1:]):
        if len(con_lattice(p.target)) != 2:
            raise HypothesisFailed(f"quotient by {theta.to_record()} is not simple")
    factors = [con_lattice(p.target) for p in projs]
    table = []
    for xi in C:
        table.append(tuple(F.index(congruence_image(p, xi)) for F, p in zip(factors, projs)))
    total = 1
    for F in factors:
        total *= len(F)
    injective = len(set(table)) == len(table)
    iso = injective and len(table) == total
    if iso:
        # order embedding both ways
        for a in range(len(C)):
            for b in range(len(C)):
                le_prod = all(F.order[x, y] for F, x, y in zip(factors, table[a], table[b]))
                if le_prod != bool(C.order[a, b]):
                    iso = False
                    break
            if not iso:
                break
    return BooleanDecomposition(alpha, Q, factors, table, iso)


def is_boolean_lattice(S):
    """True iff ``S`` is isomorphic to 2^k for some k (returns k, or None)."""
    from .lattice import atoms, direct_product
    k = len(atoms(S)) if S.n > 1 else 0
    if S.n != 2 ** k:
        return None
    return k if find_isomorphism(S, FiniteLattice.boolean(k)) is not None else None
