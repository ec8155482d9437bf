"""Finite posets, kernels and norm-coverings.

Element ids are strings at the API boundary and dense integers inside a
:class:`FinitePoset`. Elements are always stored in lexicographic order of
their ids, so every enumeration in the package is deterministic.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations, product

import numpy as np


class PosetError(ValueError):
    pass


class CapacityExhausted(Exception):
    """Every admissible value at a tree node is excluded by F."""

    def __init__(self, node, capacity, excluded):
        self.node = node
        self.capacity = capacity
        self.excluded = frozenset(excluded)
        super().__init__(
            f"capacity {capacity} at {node!r} exhausted by excluded values {sorted(self.excluded)}"
        )


def transitive_closure(rel):
    leq = np.array(rel, dtype=bool, copy=True)
    np.fill_diagonal(leq, True)
    for k in range(len(leq)):
        leq |= leq[:, k:k + 1] & leq[k:k + 1, :]
    return leq


class FinitePoset:
    """Immutable finite poset given by a full order matrix.

    ``leq[i, j]`` is true iff ``ids[i] <= ids[j]``. The constructor checks
    that the relation is reflexive, antisymmetric and transitive.
    """

    def __init__(self, ids, leq, *, name=None, check=True):
        ids = [str(x) for x in ids]
        if len(set(ids)) != len(ids):
            raise PosetError("duplicate element ids")
        leq = np.asarray(leq, dtype=bool)
        n = len(ids)
        if leq.shape != (n, n):
            raise PosetError(f"order matrix has shape {leq.shape}, expected {(n, n)}")
        order = sorted(range(n), key=lambda i: ids[i])
        if order != list(range(n)):
            ids = [ids[i] for i in order]
            leq = leq[np.ix_(order, order)]
        leq = leq.copy()
        leq.setflags(write=False)
        self.ids = tuple(ids)
        self.leq = leq
        self.name = name
        self._index = {x: i for i, x in enumerate(self.ids)}
        if check:
            self._check()

    def _check(self):
        leq = self.leq
        if not leq.diagonal().all():
            raise PosetError("order is not reflexive")
        anti = leq & leq.T
        np.fill_diagonal(anti, False)
        if anti.any():
            i, j = map(int, np.argwhere(anti)[0])
            raise PosetError(f"order is not antisymmetric: {self.ids[i]!r}, {self.ids[j]!r}")
        li = leq.astype(np.int32)
        if ((li @ li > 0) & ~leq).any():
            raise PosetError("order is not transitive")

    @classmethod
    def from_covers(cls, elements, covers, name=None):
        """Build from a cover (or any generating) relation; the closure is computed here."""
        elements = [str(x) for x in elements]
        idx = {x: i for i, x in enumerate(elements)}
        rel = np.zeros((len(elements), len(elements)), dtype=bool)
        for lo, hi in covers:
            try:
                rel[idx[str(lo)], idx[str(hi)]] = True
            except KeyError as exc:
                raise PosetError(f"unknown element {exc.args[0]!r} in covers") from None
        return cls(elements, transitive_closure(rel), name=name)

    @classmethod
    def from_relation(cls, elements, le, name=None):
        elements = list(elements)
        rel = [[bool(le(a, b)) for b in elements] for a in elements]
        return cls([str(x) for x in elements], rel, name=name)

    @classmethod
    def chain(cls, n, prefix=""):
        ids = [f"{prefix}{i}" for i in range(n)]
        return cls(ids, np.triu(np.ones((n, n), dtype=bool)))

    @classmethod
    def antichain(cls, ids):
        return cls(list(ids), np.eye(len(ids), dtype=bool))

    def __len__(self):
        return len(self.ids)

    def __iter__(self):
        return iter(self.ids)

    def __contains__(self, x):
        return x in self._index

    def __repr__(self):
        label = f" {self.name}" if self.name else ""
        return f"<FinitePoset{label} with {len(self)} elements>"

    def __eq__(self, other):
        return (
            isinstance(other, FinitePoset)
            and self.ids == other.ids
            and np.array_equal(self.leq, other.leq)
        )

    def __hash__(self):
        return hash((self.ids, self.leq.tobytes()))

    @property
    def n(self):
        return len(self.ids)

    def index(self, x):
        try:
            return self._index[x]
        except KeyError:
            raise PosetError(f"element {x!r} not in poset") from None

    def indices(self, xs):
        return [self.index(x) for x in xs]

    def le(self, x, y):
        return bool(self.leq[self.index(x), self.index(y)])

    @cached_property
    def covers_matrix(self):
        lt = self.leq.copy()
        np.fill_diagonal(lt, False)
        li = lt.astype(np.int32)
        cov = lt & ~((li @ li) > 0)
        cov.setflags(write=False)
        return cov

    @cached_property
    def _upper(self):
        return tuple(tuple(int(j) for j in np.flatnonzero(row)) for row in self.covers_matrix)

    @cached_property
    def _lower(self):
        return tuple(tuple(int(i) for i in np.flatnonzero(col)) for col in self.covers_matrix.T)

    def upper_covers(self, i):
        return self._upper[i]

    def lower_covers(self, i):
        return self._lower[i]

    def covers(self):
        """Cover pairs as (lo, hi) ids."""
        return [(self.ids[i], self.ids[j]) for i, j in np.argwhere(self.covers_matrix)]

    def down(self, i):
        return frozenset(int(k) for k in np.flatnonzero(self.leq[:, i]))

    def up(self, i):
        return frozenset(int(k) for k in np.flatnonzero(self.leq[i, :]))

    def down_set(self, xs):
        out = set()
        for i in xs:
            out |= self.down(i)
        return frozenset(out)

    def up_set(self, xs):
        out = set()
        for i in xs:
            out |= self.up(i)
        return frozenset(out)

    def is_lower_set(self, xs):
        xs = frozenset(xs)
        return self.down_set(xs) == xs

    def lower_sets(self):
        """All lower subsets (as index frozensets), smallest first."""
        out = []
        for r in range(self.n + 1):
            for xs in combinations(range(self.n), r):
                if self.is_lower_set(xs):
                    out.append(frozenset(xs))
        return out

    def minimal(self):
        return [i for i in range(self.n) if not self._lower[i]]

    def maximal(self):
        return [i for i in range(self.n) if not self._upper[i]]

    def non_minimal(self):
        return [i for i in range(self.n) if self._lower[i]]

    def non_maximal(self):
        return [i for i in range(self.n) if self._upper[i]]

    def unique_lower_cover(self, j):
        lc = self._lower[j]
        return lc[0] if len(lc) == 1 else None

    def is_chain(self, xs):
        xs = list(xs)
        return all(self.leq[a, b] or self.leq[b, a] for a, b in combinations(xs, 2))

    def least(self):
        mins = self.minimal()
        if len(mins) == 1 and self.leq[mins[0]].all():
            return mins[0]
        return None

    def is_tree(self):
        if self.least() is None:
            return False
        return all(self.is_chain(self.down(t)) for t in range(self.n))

    @cached_property
    def heights(self):
        """Length of the longest chain ending at each element."""
        h = [0] * self.n
        for i in self.linear_extension():
            for k in self._lower[i]:
                h[i] = max(h[i], h[k] + 1)
        return tuple(h)

    @cached_property
    def depths(self):
        d = [0] * self.n
        for i in reversed(self.linear_extension()):
            for k in self._upper[i]:
                d[i] = max(d[i], d[k] + 1)
        return tuple(d)

    def linear_extension(self):
        """Indices sorted by (number of elements below, index)."""
        below = self.leq.sum(axis=0)
        return sorted(range(self.n), key=lambda i: (int(below[i]), i))

    def subposet(self, xs, name=None):
        xs = sorted(xs)
        return FinitePoset([self.ids[i] for i in xs], self.leq[np.ix_(xs, xs)], name=name, check=False)

    def dual(self, name=None):
        return FinitePoset(self.ids, self.leq.T, name=name, check=False)

    def to_record(self):
        rec = {"elements": list(self.ids), "covers": [list(c) for c in self.covers()]}
        if self.name:
            rec["name"] = self.name
        return rec

    @classmethod
    def from_record(cls, rec):
        if "elements" not in rec or "covers" not in rec:
            raise PosetError("poset record needs 'elements' and 'covers'")
        return cls.from_covers(rec["elements"], rec["covers"], name=rec.get("name"))


def product_poset(P, Q):
    """Cartesian product ordered componentwise; ids are ``(p,q)``."""
    ids, pairs = [], []
    for i, j in product(range(P.n), range(Q.n)):
        ids.append(f"({P.ids[i]},{Q.ids[j]})")
        pairs.append((i, j))
    m = len(ids)
    leq = np.zeros((m, m), dtype=bool)
    for a, (i, j) in enumerate(pairs):
        for b, (k, l) in enumerate(pairs):
            leq[a, b] = P.leq[i, k] and Q.leq[j, l]
    return FinitePoset(ids, leq), {ids[a]: (P.ids[i], Q.ids[j]) for a, (i, j) in enumerate(pairs)}


# ---------------------------------------------------------------- kernels

def is_kernel(U, V):
    """True iff every ``V ∩ ↓u`` has a greatest element."""
    vs = U.indices(V)
    if not vs:
        return False
    return all(_kernel_top(U, vs, u) is not None for u in range(U.n))


def _kernel_top(U, vs, u):
    below = [v for v in vs if U.leq[v, u]]
    for v in below:
        if all(U.leq[w, v] for w in below):
            return v
    return None


@dataclass(frozen=True)
class Kernel:
    parent: FinitePoset
    members: frozenset

    def __post_init__(self):
        object.__setattr__(self, "members", frozenset(self.members))
        if not is_kernel(self.parent, self.members):
            raise PosetError(f"{sorted(self.members)} is not a kernel")

    def project(self, u):
        """``V·u``: the largest member below ``u``."""
        U = self.parent
        return U.ids[_kernel_top(U, U.indices(self.members), U.index(u))]

    def project_ideal(self, ideal):
        return self.project(ideal.generator)

    def __iter__(self):
        return iter(sorted(self.members))

    def __len__(self):
        return len(self.members)

    def __contains__(self, x):
        return x in self.members

    def __repr__(self):
        return f"Kernel({sorted(self.members)})"


def kernel_project(V, u):
    return V.project(u)


def kernel_intersection(V, W):
    if V.parent != W.parent:
        raise PosetError("kernels live in different posets")
    return Kernel(V.parent, V.members & W.members)


def kernels_containing(U, X, limit=16):
    """All kernels of ``U`` containing ``X``; only for small ``U``."""
    if U.n > limit:
        raise PosetError(f"refusing to enumerate kernels of a {U.n}-element poset")
    X = frozenset(X)
    rest = [x for x in U.ids if x not in X]
    out = []
    for r in range(len(rest) + 1):
        for extra in combinations(rest, r):
            cand = X | frozenset(extra)
            if cand and is_kernel(U, cand):
                out.append(Kernel(U, cand))
    return out


# ---------------------------------------------------------- norm-coverings

@dataclass(frozen=True, eq=False)
class NormCovering:
    U: FinitePoset
    I: FinitePoset
    norm: dict

    def __post_init__(self):
        for u in self.U.ids:
            if u not in self.norm:
                raise PosetError(f"norm undefined at {u!r}")
            self.I.index(self.norm[u])
        for a in range(self.U.n):
            for b in np.flatnonzero(self.U.leq[a]):
                if not self.I.le(self.norm[self.U.ids[a]], self.norm[self.U.ids[b]]):
                    raise PosetError("norm is not order-preserving")

    def __call__(self, u):
        return self.norm[u]

    def down(self, u):
        """Ids of the principal ideal ``U↓u``."""
        U = self.U
        return frozenset(U.ids[k] for k in U.down(U.index(u)))


@dataclass(frozen=True)
class SharpIdeal:
    """A principal ideal ``U↓generator``; every ideal of a finite poset is principal."""

    covering: NormCovering = field(repr=False, compare=False)
    generator: str

    @property
    def norm(self):
        return self.covering.norm[self.generator]

    @property
    def members(self):
        return self.covering.down(self.generator)

    def __le__(self, other):
        return self.covering.U.le(self.generator, other.generator)


def sharp_ideals(nc):
    return [SharpIdeal(nc, u) for u in nc.U.ids]


def extreme_ideals(nc):
    U, I = nc.U, nc.I
    out = []
    for u in range(U.n):
        nu = nc.norm[U.ids[u]]
        if not any(v != u and U.leq[u, v] and nc.norm[U.ids[v]] == nu for v in range(U.n)):
            out.append(SharpIdeal(nc, U.ids[u]))
    return out


def is_tight(nc):
    I = nc.I
    ext = extreme_ideals(nc)
    for e in ext:
        below = [f for f in ext if f <= e]
        target = I.down(I.index(e.norm))
        norms = [I.index(f.norm) for f in below]
        if len(set(norms)) != len(norms) or set(norms) != set(target):
            return False
        for f, g in product(below, repeat=2):
            if (f <= g) != bool(I.leq[I.index(f.norm), I.index(g.norm)]):
                return False
    return True


# ------------------------------------------------------ tree coverings, σ

class TreeCovering(NormCovering):
    """Norm-covering of a finite tree by partial functions on chains.

    ``functions[u]`` is the partial function of ``u`` as a tuple of
    ``(tree node, value)`` pairs listed bottom-up.
    """

    def __init__(self, tree, capacity, functions, U, norm):
        super().__init__(U, tree, norm)
        object.__setattr__(self, "tree", tree)
        object.__setattr__(self, "capacity", capacity)
        object.__setattr__(self, "functions", functions)
        object.__setattr__(self, "by_function", {f: u for u, f in functions.items()})

    def element(self, assignment):
        """Id of the element for ``{node: value}``."""
        T = self.tree
        key = tuple(sorted(assignment.items(), key=lambda kv: (T.heights[T.index(kv[0])], kv[0])))
        return self.by_function[key]


def _function_id(fn):
    return "{" + ",".join(f"{t}:{v}" for t, v in fn) + "}"


def build_tree_covering(T, capacity):
    """Partial functions on finite chains of the non-minimal part of ``T``.

    ``capacity`` is an int or a mapping node id -> int; values at node ``t``
    range over ``range(capacity[t])``.
    """
    if not T.is_tree():
        raise PosetError("index poset is not a tree")
    bottom = T.least()
    nodes = [T.ids[t] for t in T.non_minimal()]
    if isinstance(capacity, int):
        capacity = {t: capacity for t in nodes}
    capacity = {t: int(capacity[t]) for t in nodes}
    if any(c < 1 for c in capacity.values()):
        raise PosetError("capacities must be positive")
    order = sorted(nodes, key=lambda t: (T.heights[T.index(t)], t))
    chains = []
    for r in range(len(order) + 1):
        for c in combinations(order, r):
            if T.is_chain(T.indices(c)):
                chains.append(c)
    functions = {}
    for c in chains:
        for vals in product(*(range(capacity[t]) for t in c)):
            fn = tuple(zip(c, vals))
            functions[_function_id(fn)] = fn
    ids = sorted(functions)
    m = len(ids)
    leq = np.zeros((m, m), dtype=bool)
    as_sets = [set(functions[u]) for u in ids]
    for a in range(m):
        for b in range(m):
            leq[a, b] = as_sets[a] <= as_sets[b]
    U = FinitePoset(ids, leq, check=False)
    norm = {}
    for u in ids:
        fn = functions[u]
        norm[u] = fn[-1][0] if fn else T.ids[bottom]
    return TreeCovering(T, capacity, functions, U, norm)


def check_monotone_family(nc, F):
    ext = extreme_ideals(nc)
    for e, f in product(ext, repeat=2):
        if e <= f and not set(F.get(e.generator, ())) <= set(F.get(f.generator, ())):
            return False
    return True


def monotone_hull(nc, F):
    """Smallest order-preserving family above ``F`` on the extreme ideals."""
    ext = extreme_ideals(nc)
    out = {}
    for f in ext:
        acc = set()
        for e in ext:
            if e <= f:
                acc |= set(F.get(e.generator, ()))
        out[f.generator] = frozenset(acc)
    return out


def sigma_select(nc, F):
    """Construct σ: I -> extreme ideals compatible with ``F``.

    ``F`` maps generators of extreme ideals to sets of ``U`` ids (missing keys
    mean the empty set) and must be order-preserving. Tree nodes are visited
    bottom-up; at each node the least value not excluded by
    ``F_t(x↾φ(s))`` for ``s < t`` is taken. Raises :class:`CapacityExhausted`
    when no admissible value remains.
    """
    if not isinstance(nc, TreeCovering):
        raise PosetError("sigma_select needs a covering built by build_tree_covering")
    if not check_monotone_family(nc, F):
        raise PosetError("F is not order-preserving on extreme ideals")
    T = nc.tree
    order = sorted(T.non_minimal(), key=lambda t: (T.heights[t], T.ids[t]))
    x = {}

    def restrict(t):
        # x↾φ(t), φ(t) = ↓t minus the root
        dom = [T.ids[s] for s in order if T.leq[s, t] and T.ids[s] in x]
        return nc.element({s: x[s] for s in dom})

    for t in order:
        tid = T.ids[t]
        excluded = set()
        for s in range(T.n):
            if s != t and T.leq[s, t]:
                for v in F.get(restrict(s), ()):
                    fn = dict(nc.functions[v])
                    if tid in fn:
                        excluded.add(fn[tid])
        free = [v for v in range(nc.capacity[tid]) if v not in excluded]
        if not free:
            raise CapacityExhausted(tid, nc.capacity[tid], excluded)
        x[tid] = free[0]
    return {T.ids[t]: SharpIdeal(nc, restrict(t)) for t in range(T.n)}


def check_compatibility(nc, F, sigma):
    """Compatibility: ``|σ(i)| = i``, σ monotone, and ``F(σ(i)) ∩ σ(j) ⊆ σ(i)`` for ``i <= j``."""
    I = nc.I
    for i in I.ids:
        if sigma[i].norm != i:
            return False
    for i in I.ids:
        for j in I.ids:
            if I.le(i, j):
                if not sigma[i] <= sigma[j]:
                    return False
                lhs = set(F.get(sigma[i].generator, ())) & sigma[j].members
                if not lhs <= sigma[i].members:
                    return False
    return True


def finite_T(k):
    """The poset ⊥ < 0, 1, ..., k-1 (an antichain above a bottom)."""
    ids = ["bot"] + [str(i) for i in range(k)]
    return FinitePoset.from_covers(ids, [("bot", str(i)) for i in range(k)], name=f"T_{k}")


def finite_T_covering(k):
    """``T_k`` normed onto the 2-element chain {0 < 1}."""
    U = finite_T(k)
    I = FinitePoset.chain(2)
    return NormCovering(U, I, {u: ("0" if u == "bot" else "1") for u in U.ids})


def covering_isomorphism(nc1, nc2):
    """An order isomorphism ``U1 -> U2`` commuting with the norms (same index
    poset), as an id mapping, or None. Plain backtracking; small ``U`` only."""
    if nc1.I != nc2.I or nc1.U.n != nc2.U.n:
        return None
    U1, U2 = nc1.U, nc2.U
    order = U1.linear_extension()
    f = {}
    used = set()

    def rec(k):
        if k == len(order):
            return True
        a = order[k]
        for b in range(U2.n):
            if b in used or nc1.norm[U1.ids[a]] != nc2.norm[U2.ids[b]]:
                continue
            if all(U1.leq[a, c] == U2.leq[b, f[c]] and U1.leq[c, a] == U2.leq[f[c], b] for c in f):
                f[a] = b
                used.add(b)
                if rec(k + 1):
                    return True
                del f[a]
                used.discard(b)
        return False

    if rec(0):
        return {U1.ids[a]: U2.ids[b] for a, b in f.items()}
    return None
