"""Finite lattices, (∨,0)-semilattices, homomorphisms and isomorphism search."""
from __future__ import annotations

from functools import cached_property
from itertools import product

import numpy as np

from .poset import FinitePoset, PosetError


class ValidationError(ValueError):
    pass


class NotALattice(ValidationError):
    def __init__(self, pair, missing):
        self.pair = pair
        self.missing = missing
        super().__init__(f"no {missing} for pair {pair}")


class ResourceExhausted(RuntimeError):
    """A search hit its configured cap; results gathered so far are partial."""

    def __init__(self, msg, partial=None):
        super().__init__(msg)
        self.partial = partial


class FiniteLattice:
    """A finite lattice with meet/join tables over the poset's dense indices."""

    def __init__(self, poset, meet, join, *, name=None, factors=None):
        self.poset = poset
        self.meet = np.asarray(meet, dtype=np.int64)
        self.join = np.asarray(join, dtype=np.int64)
        self.meet.setflags(write=False)
        self.join.setflags(write=False)
        self.name = name if name is not None else poset.name
        # direct factors, recorded by direct_product
        self.factors = factors
        self.bottom = int(np.flatnonzero(poset.leq.all(axis=1))[0])
        self.top = int(np.flatnonzero(poset.leq.all(axis=0))[0])

    @classmethod
    def from_poset(cls, P, name=None):
        n = P.n
        if n == 0:
            raise ValidationError("empty poset")
        leq = P.leq
        li = leq.astype(np.int64)
        meet = np.empty((n, n), dtype=np.int64)
        join = np.empty((n, n), dtype=np.int64)
        for i in range(n):
            lb = leq[:, i][:, None] & leq  # lb[k, j]: k <= i and k <= j
            cnt = li.T @ lb.astype(np.int64)  # cnt[k, j] = #lower bounds of (i,j) below k
            ok = lb & (cnt == lb.sum(axis=0)[None, :])
            ub = leq[i, :][:, None] & leq.T  # ub[k, j]: k >= i and k >= j
            cnt2 = li @ ub.astype(np.int64)
            ok2 = ub & (cnt2 == ub.sum(axis=0)[None, :])
            for j in range(i, n):
                g = np.flatnonzero(ok[:, j])
                if len(g) != 1:
                    raise NotALattice((P.ids[i], P.ids[j]), "meet")
                l = np.flatnonzero(ok2[:, j])
                if len(l) != 1:
                    raise NotALattice((P.ids[i], P.ids[j]), "join")
                meet[i, j] = meet[j, i] = g[0]
                join[i, j] = join[j, i] = l[0]
        return cls(P, meet, join, name=name if name is not None else P.name)

    @classmethod
    def from_covers(cls, elements, covers, name=None):
        return cls.from_poset(FinitePoset.from_covers(elements, covers, name=name), name=name)

    @classmethod
    def from_record(cls, rec):
        try:
            P = FinitePoset.from_record(rec)
        except PosetError as exc:
            raise ValidationError(str(exc)) from exc
        return cls.from_poset(P)

    def to_record(self):
        return self.poset.to_record()

    @classmethod
    def chain(cls, n):
        return cls.from_poset(FinitePoset.chain(n), name=f"C{n}")

    @classmethod
    def M(cls, k):
        ids = ["0", "1"] + [f"a{i}" for i in range(1, k + 1)]
        covers = [("0", f"a{i}") for i in range(1, k + 1)] + [(f"a{i}", "1") for i in range(1, k + 1)]
        return cls.from_covers(ids, covers, name=f"M{k}")

    @classmethod
    def N5(cls):
        return cls.from_covers(
            ["0", "a", "b", "c", "1"], [("0", "a"), ("a", "c"), ("c", "1"), ("0", "b"), ("b", "1")], name="N5"
        )

    @classmethod
    def boolean(cls, k):
        return direct_product(*[cls.chain(2)] * k)

    # basic access -------------------------------------------------------

    def __len__(self):
        return self.poset.n

    @property
    def n(self):
        return self.poset.n

    @property
    def ids(self):
        return self.poset.ids

    @property
    def leq(self):
        return self.poset.leq

    def index(self, x):
        return self.poset.index(x)

    def __repr__(self):
        label = f" {self.name}" if self.name else ""
        return f"<{type(self).__name__}{label} with {self.n} elements>"

    def __eq__(self, other):
        return isinstance(other, FiniteLattice) and self.poset == other.poset

    def __hash__(self):
        return hash(self.poset)

    def m(self, x, y):
        return self.ids[self.meet[self.index(x), self.index(y)]]

    def j(self, x, y):
        return self.ids[self.join[self.index(x), self.index(y)]]

    def check_tables(self):
        """Exhaustive check of the lattice laws against the order."""
        n, M, J, leq = self.n, self.meet, self.join, self.leq
        idx = np.arange(n)
        if not (np.array_equal(M, M.T) and np.array_equal(J, J.T)):
            return False
        if not (np.array_equal(M == idx[:, None], leq) and np.array_equal(J == idx[None, :], leq)):
            return False
        for a in range(n):
            # (a^b)^c == a^(b^c)
            if not np.array_equal(M[M[a]], M[a][M]):
                return False
            if not np.array_equal(J[J[a]], J[a][J]):
                return False
        # absorption
        return bool((M[idx[:, None], J] == idx[:, None]).all() and (J[idx[:, None], M] == idx[:, None]).all())

    @cached_property
    def _tables_list(self):
        return self.meet.tolist(), self.join.tolist()

    @cached_property
    def heights(self):
        return self.poset.heights

    @cached_property
    def depths(self):
        return self.poset.depths

    def upper_covers(self, i):
        return self.poset.upper_covers(i)

    def lower_covers(self, i):
        return self.poset.lower_covers(i)

    def cover_pairs(self):
        return [tuple(map(int, p)) for p in np.argwhere(self.poset.covers_matrix)]

    def sublattice(self, xs, name=None):
        """Induced lattice on a closed index set (ids are kept)."""
        xs = sorted(int(x) for x in xs)
        pos = {x: k for k, x in enumerate(xs)}
        sub = np.array(xs)
        M = self.meet[np.ix_(sub, sub)]
        J = self.join[np.ix_(sub, sub)]
        try:
            M = np.vectorize(pos.__getitem__, otypes=[np.int64])(M)
            J = np.vectorize(pos.__getitem__, otypes=[np.int64])(J)
        except KeyError:
            raise ValidationError("subset is not closed under meet and join") from None
        P = self.poset.subposet(xs)
        return FiniteLattice(P, M, J, name=name)

    def sub_ids(self, ids, name=None):
        return self.sublattice(self.poset.indices(ids), name=name)

    def without(self, *ids, name=None):
        drop = set(ids)
        for x in drop:
            self.index(x)
        keep = [i for i, x in enumerate(self.ids) if x not in drop]
        if name is None and self.name:
            name = f"{self.name}-{{{','.join(sorted(drop))}}}"
        return self.sublattice(keep, name=name)

    def dual(self, name=None):
        return FiniteLattice(self.poset.dual(), self.join, self.meet, name=name)

    def relabel(self, mapping, name=None):
        """Copy with ids renamed through ``mapping`` (old id -> new id)."""
        new_ids = [mapping.get(x, x) for x in self.ids]
        P = FinitePoset(new_ids, self.leq, name=name, check=False)
        perm = [P.index(x) for x in new_ids]  # old index -> new index
        inv = np.argsort(perm)
        permarr = np.array(perm)
        M = permarr[self.meet[np.ix_(inv, inv)]]
        J = permarr[self.join[np.ix_(inv, inv)]]
        return FiniteLattice(P, M, J, name=name)


class JoinSemilattice0(FiniteLattice):
    """A finite (∨,0)-semilattice. Finite ones are lattices, so meets are kept too."""

    @property
    def zero(self):
        return self.bottom

    @classmethod
    def of(cls, L, name=None):
        S = cls(L.poset, L.meet, L.join, name=name if name is not None else L.name, factors=L.factors)
        if L.factors:
            S.coords = L.coords
        return S


class LatticeHom:
    """A map between finite lattices given by an index table."""

    def __init__(self, source, target, table, *, kind="lattice", check=True):
        self.source = source
        self.target = target
        self.table = tuple(int(t) for t in table)
        self.kind = kind
        if check and not self.is_homomorphism():
            raise ValidationError(f"map does not preserve the {kind} operations")

    @classmethod
    def from_ids(cls, source, target, mapping, **kw):
        return cls(source, target, [target.index(mapping[x]) for x in source.ids], **kw)

    @classmethod
    def identity(cls, L, kind="lattice"):
        return cls(L, L, range(L.n), kind=kind, check=False)

    @classmethod
    def inclusion(cls, K, L):
        """Inclusion of a lattice whose ids are ids of ``L``."""
        return cls(K, L, [L.index(x) for x in K.ids])

    def __call__(self, x):
        return self.target.ids[self.table[self.source.index(x)]]

    def as_dict(self):
        return {x: self.target.ids[t] for x, t in zip(self.source.ids, self.table)}

    def is_homomorphism(self):
        f = np.array(self.table)
        S, T = self.source, self.target
        if len(f) != S.n:
            return False
        if not np.array_equal(f[S.join], T.join[np.ix_(f, f)]):
            return False
        if self.kind == "lattice":
            return bool(np.array_equal(f[S.meet], T.meet[np.ix_(f, f)]))
        return f[S.bottom] == T.bottom

    def preserves_bounds(self):
        return self.table[self.source.bottom] == self.target.bottom and self.table[self.source.top] == self.target.top

    def compose(self, other):
        """``self ∘ other``."""
        if other.target is not self.source and other.target != self.source:
            raise ValidationError("cannot compose: codomain/domain mismatch")
        return LatticeHom(other.source, self.target, [self.table[t] for t in other.table], kind=self.kind, check=False)

    def __matmul__(self, other):
        return self.compose(other)

    def __eq__(self, other):
        return isinstance(other, LatticeHom) and self.table == other.table and self.source == other.source and self.target == other.target

    def __hash__(self):
        return hash(self.table)

    def __repr__(self):
        return f"LatticeHom({self.source.name or '?'} -> {self.target.name or '?'})"

    def is_injective(self):
        return len(set(self.table)) == len(self.table)

    def is_surjective(self):
        return len(set(self.table)) == self.target.n

    def image(self):
        return sorted(set(self.table))


def validate(P, name=None):
    """Build the lattice on a poset, raising :class:`NotALattice` with the offending pair."""
    if isinstance(P, dict):
        return FiniteLattice.from_record(P)
    return FiniteLattice.from_poset(P, name=name)


# -------------------------------------------------------- structure queries

def length(L):
    return max(L.heights)


def atoms(L):
    return {L.ids[i] for i in L.upper_covers(L.bottom)}


def coatoms(L):
    return {L.ids[i] for i in L.lower_covers(L.top)}


def is_modular(L):
    M, J, leq = L.meet, L.join, L.leq
    for x in range(L.n):
        for z in np.flatnonzero(leq[x]):
            # x <= z  =>  x v (y ^ z) == (x v y) ^ z  for all y
            lhs = J[x, M[:, z]]
            rhs = M[J[x, :], z]
            if not np.array_equal(lhs, rhs):
                return False
    return True


def is_distributive(L):
    M, J = L.meet, L.join
    for x in range(L.n):
        lhs = M[x, J]  # x ^ (y v z)
        rhs = J[np.ix_(M[x], M[x])]  # (x ^ y) v (x ^ z)
        if not np.array_equal(lhs, rhs):
            return False
    return True


def join_irreducibles(L):
    return [i for i in range(L.n) if len(L.lower_covers(i)) == 1]


def meet_irreducibles(L):
    return [i for i in range(L.n) if len(L.upper_covers(i)) == 1]


def doubly_irreducible(L):
    return {L.ids[i] for i in range(L.n) if len(L.lower_covers(i)) == 1 and len(L.upper_covers(i)) == 1}


# ------------------------------------------------------------ sublattices

def closure_mask(L, mask):
    """Smallest meet/join closed superset of a bitmask of indices."""
    M, J = L._tables_list
    elems = [i for i in range(L.n) if mask >> i & 1]
    frontier = elems[:]
    while frontier:
        new = []
        for a in frontier:
            ra, sa = M[a], J[a]
            for b in elems:
                for c in (ra[b], sa[b]):
                    if not mask >> c & 1:
                        mask |= 1 << c
                        new.append(c)
        elems.extend(new)
        frontier = new
    return mask


def mask_of(xs):
    m = 0
    for x in xs:
        m |= 1 << int(x)
    return m


def bits(mask):
    out, i = [], 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def generated_sublattice(L, X):
    X = list(X)
    if not X:
        raise ValidationError("empty generating set")
    idx = [L.index(x) if isinstance(x, str) else int(x) for x in X]
    return L.sublattice(bits(closure_mask(L, mask_of(idx))))


def sublattice_masks(L, cap=10**6):
    """All nonempty sublattices as bitmasks, by NextClosure in lectic order."""
    n = L.n
    out = []
    A = 0
    visited = 0
    while True:
        if A:
            out.append(A)
        for i in range(n - 1, -1, -1):
            bit = 1 << i
            if A & bit:
                continue
            low = A & (bit - 1)
            B = closure_mask(L, low | bit)
            visited += 1
            if visited > cap:
                raise ResourceExhausted(f"sublattice enumeration exceeded {cap} closures", partial=out)
            if not (B & ~A) & (bit - 1):
                A = B
                break
        else:
            break
    return out


def _canonical_mask_order(masks):
    return sorted(masks, key=lambda m: (bin(m).count("1"), bits(m)))


def all_sublattices(L, min_size=1, max_size=None, cap=10**6):
    max_size = L.n if max_size is None else max_size
    masks = [m for m in sublattice_masks(L, cap) if min_size <= bin(m).count("1") <= max_size]
    return [L.sublattice(bits(m)) for m in _canonical_mask_order(masks)]


def maximal_sublattices(L, cap=10**6):
    full = (1 << L.n) - 1
    proper = [m for m in sublattice_masks(L, cap) if m != full]
    maxi = [m for m in proper if not any(m != o and m & o == m for o in proper)]
    return [L.sublattice(bits(m)) for m in _canonical_mask_order(maxi)]


def direct_product(*Ls, name=None):
    if not Ls:
        P = FinitePoset(["()"], [[True]])
        return FiniteLattice(P, [[0]], [[0]], name=name or "1", factors=())
    shapes = [L.n for L in Ls]
    combos = list(product(*[range(s) for s in shapes]))
    ids = ["(" + ",".join(L.ids[c] for L, c in zip(Ls, combo)) + ")" for combo in combos]
    m = len(combos)
    code = np.array(combos, dtype=np.int64).reshape(m, len(Ls))
    leq = np.ones((m, m), dtype=bool)
    flat_meet = np.zeros((m, m), dtype=np.int64)
    flat_join = np.zeros((m, m), dtype=np.int64)
    strides = np.cumprod([1] + shapes[::-1][:-1])[::-1]
    for k, L in enumerate(Ls):
        col = code[:, k]
        leq &= L.leq[np.ix_(col, col)]
        flat_meet += L.meet[np.ix_(col, col)] * strides[k]
        flat_join += L.join[np.ix_(col, col)] * strides[k]
    # combos are in row-major order so the flat code is the combo index;
    # FinitePoset re-sorts ids, so remap through the final positions.
    P = FinitePoset(ids, leq, check=False)
    pos = np.array([P.index(x) for x in ids])
    inv = np.argsort(pos)
    meet = pos[flat_meet][np.ix_(inv, inv)]
    join = pos[flat_join][np.ix_(inv, inv)]
    L = FiniteLattice(P, meet, join, name=name, factors=tuple(Ls))
    L.coords = tuple(tuple(int(c) for c in code[inv[k]]) for k in range(m))
    return L


def projection(Pr, k):
    """Projection of a direct product onto factor ``k``."""
    return LatticeHom(Pr, Pr.factors[k], [c[k] for c in Pr.coords], check=False)


# ------------------------------------------------------------ isomorphisms

def _invariants(L):
    P = L.poset
    below = L.leq.sum(axis=0)
    above = L.leq.sum(axis=1)
    return [
        (L.heights[i], L.depths[i], len(P.lower_covers(i)), len(P.upper_covers(i)), int(below[i]), int(above[i]))
        for i in range(L.n)
    ]


def _refined_colors(L, colors):
    """Iterated refinement of colors by the multisets of cover-neighbour colors."""
    P = L.poset
    colors = list(colors)
    while True:
        sig = [
            (colors[i], tuple(sorted(colors[k] for k in P.lower_covers(i))), tuple(sorted(colors[k] for k in P.upper_covers(i))))
            for i in range(L.n)
        ]
        keys = sorted(set(sig))
        rank = {s: r for r, s in enumerate(keys)}
        new = [rank[s] for s in sig]
        if len(set(new)) == len(set(colors)):
            return new
        colors = new


def iter_isomorphisms(L1, L2):
    """All order isomorphisms as index tables (lattice isos are order isos)."""
    if L1.n != L2.n:
        return
    inv1, inv2 = _invariants(L1), _invariants(L2)
    if sorted(inv1) != sorted(inv2):
        return
    order = sorted(range(L1.n), key=lambda i: (L1.heights[i], i))
    cands = {i: [j for j in range(L2.n) if inv2[j] == inv1[i]] for i in order}
    leq1, leq2 = L1.leq, L2.leq
    f = [-1] * L1.n
    used = [False] * L2.n

    def rec(k):
        if k == len(order):
            yield tuple(f)
            return
        i = order[k]
        for j in cands[i]:
            if used[j]:
                continue
            ok = True
            for i2 in order[:k]:
                j2 = f[i2]
                if leq1[i, i2] != leq2[j, j2] or leq1[i2, i] != leq2[j2, j]:
                    ok = False
                    break
            if ok:
                f[i] = j
                used[j] = True
                yield from rec(k + 1)
                used[j] = False
                f[i] = -1

    yield from rec(0)


def find_isomorphism(L1, L2):
    """First isomorphism found as an id mapping, or None."""
    for f in iter_isomorphisms(L1, L2):
        return {L1.ids[i]: L2.ids[j] for i, j in enumerate(f)}
    return None


def is_isomorphic(L1, L2):
    return find_isomorphism(L1, L2) is not None


def canonical_form(L):
    """Isomorphism-invariant certificate: the lexicographically least order
    matrix over all labelings compatible with refined colors.
    """
    cached = getattr(L, "_canon", None)
    if cached is not None:
        return cached
    inv = _invariants(L)
    keys = sorted(set(inv))
    colors = _refined_colors(L, [keys.index(v) for v in inv])
    best = None
    leq = L.leq

    def cert(order):
        sub = leq[np.ix_(order, order)]
        return np.packbits(sub).tobytes()

    def search(colors):
        nonlocal best
        counts = {}
        for c in colors:
            counts[c] = counts.get(c, 0) + 1
        target = None
        for c in sorted(counts):
            if counts[c] > 1:
                target = c
                break
        if target is None:
            order = sorted(range(L.n), key=lambda i: colors[i])
            c = cert(order)
            if best is None or c < best:
                best = c
            return
        for i in range(L.n):
            if colors[i] == target:
                new = [2 * c + (1 if (c == target and k != i) else 0) for k, c in enumerate(colors)]
                search(_refined_colors(L, new))

    search(colors)
    out = (L.n, best)
    L._canon = out
    return out


# ----------------------------------------------------------- homomorphisms

def iter_homomorphisms(L1, L2, injective=False, fixed=None):
    """All lattice homomorphisms ``L1 -> L2`` as index tables.

    Values are chosen on the bottom and the join-irreducibles (which generate
    ``L1`` under joins) and everything else is propagated through the meet
    and join tables.
    """
    M1, J1 = L1._tables_list
    M2, J2 = L2._tables_list
    n1 = L1.n
    gens = [L1.bottom] + sorted(join_irreducibles(L1), key=lambda i: (L1.heights[i], i))
    h1, d1 = L1.heights, L1.depths
    h2, d2 = L2.heights, L2.depths

    def candidates(i):
        if injective:
            return [j for j in range(L2.n) if h2[j] >= h1[i] and d2[j] >= d1[i]]
        return list(range(L2.n))

    cands = {i: candidates(i) for i in gens}
    if fixed:
        for i, j in fixed.items():
            cands[i] = [j] if j in cands.get(i, range(L2.n)) or i not in cands else []

    def assign(f, used, i, j):
        """Assign f[i]=j and propagate; return list of newly set indices or None."""
        stack = [(i, j)]
        added = []
        while stack:
            a, b = stack.pop()
            if f[a] != -1:
                if f[a] != b:
                    return added, False
                continue
            if injective and used.get(b) is not None:
                return added, False
            f[a] = b
            if injective:
                used[b] = a
            added.append(a)
            for c in range(n1):
                fc = f[c]
                if fc == -1:
                    continue
                stack.append((M1[a][c], M2[b][fc]))
                stack.append((J1[a][c], J2[b][fc]))
        return added, True

    f = [-1] * n1
    used = {}

    def undo(added):
        for a in added:
            if injective:
                del used[f[a]]
            f[a] = -1

    def rec(k):
        while k < len(gens) and f[gens[k]] != -1:
            k += 1
        if k == len(gens):
            if all(v != -1 for v in f):
                yield tuple(f)
            return
        i = gens[k]
        for j in cands[i]:
            added, ok = assign(f, used, i, j)
            if ok:
                yield from rec(k + 1)
            undo(added)

    yield from rec(0)


def find_homomorphisms(L1, L2, injective=False, limit=None):
    out = []
    for t in iter_homomorphisms(L1, L2, injective=injective):
        out.append(LatticeHom(L1, L2, t, check=False))
        if limit is not None and len(out) >= limit:
            break
    return out


def find_embeddings(L1, L2, limit=None):
    return find_homomorphisms(L1, L2, injective=True, limit=limit)


def embeds(L1, L2):
    if L1.n > L2.n or length(L1) > length(L2):
        return False
    return next(iter_homomorphisms(L1, L2, injective=True), None) is not None


# ------------------------------------------------------------------ output

def hasse_text(L):
    lines = []
    for i in sorted(range(L.n), key=lambda i: (L.heights[i], L.ids[i])):
        ups = ", ".join(L.ids[j] for j in L.upper_covers(i))
        lines.append(f"  {L.ids[i]} < {ups}" if ups else f"  {L.ids[i]}")
    return "\n".join(lines)


def to_dot(L):
    lines = [f'digraph "{L.name or "L"}" {{', "  rankdir=BT;"]
    for a, b in L.poset.covers():
        lines.append(f'  "{a}" -> "{b}";')
    lines.append("}")
    return "\n".join(lines)
