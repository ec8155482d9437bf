"""Finitely generated lattice varieties HSP(K).

Everything rests on Jónsson's lemma: in a finitely generated congruence
distributive variety the subdirectly irreducible members are exactly the SI
lattices in HS(K), so membership of a finite lattice reduces to checking its
SI quotients against that finite list.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .congruence import (
    con_lattice,
    is_simple,
    is_subdirectly_irreducible,
    meet_irreducible,
    quotient,
)
from .lattice import (
    FiniteLattice,
    ResourceExhausted,
    all_sublattices,
    bits,
    canonical_form,
    closure_mask,
    direct_product,
    find_isomorphism,
    embeds,
    length,
    mask_of,
)


def _dedupe(lattices):
    seen = {}
    for L in lattices:
        seen.setdefault(canonical_form(L), L)
    return [seen[k] for k in sorted(seen)]


class VarietySpec:
    """``HSP(generators)`` with lazily built, canonical member caches."""

    def __init__(self, generators, name=None, cap=10 ** 6):
        self.generators = list(generators)
        self.name = name
        self.cap = cap
        self._hs = None
        self._si = None

    def __repr__(self):
        gens = ", ".join(g.name or f"<{g.n}>" for g in self.generators)
        return f"HSP({gens})"

    def subalgebras(self):
        return _dedupe(S for G in self.generators for S in all_sublattices(G, cap=self.cap))

    def hs_members(self):
        """All quotients of sublattices of generators, up to isomorphism."""
        if self._hs is None:
            out = []
            for S in self.subalgebras():
                for theta in con_lattice(S):
                    out.append(quotient(S, theta)[0])
            self._hs = _dedupe(out)
        return self._hs

    def si_members(self):
        if self._si is None:
            out = []
            for S in self.subalgebras():
                C = con_lattice(S)
                for theta in meet_irreducible(C):
                    Q = quotient(S, theta)[0]
                    assert is_subdirectly_irreducible(Q)
                    out.append(Q)
            self._si = _dedupe(out)
        return self._si

    def simple_members(self, length_eq=None):
        return [L for L in self.si_members() if is_simple(L) and (length_eq is None or length(L) == length_eq)]

    def contains(self, L):
        if L.n == 1:
            return True
        known = {canonical_form(S) for S in self.si_members()}
        for theta in meet_irreducible(con_lattice(L)):
            if canonical_form(quotient(L, theta)[0]) not in known:
                return False
        return True

    def is_finitely_semisimple(self):
        """``(True, None)`` or ``(False, counterexample)``."""
        for L in self.si_members():
            if not is_simple(L):
                return False, L
        return True, None

    # ------------------------------------------------------------ cache

    def save_cache(self, directory, provenance=None):
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        index = {"generators": [g.name for g in self.generators], "provenance": provenance or {}, "si": []}
        for k, L in enumerate(self.si_members()):
            fn = f"si_{k:03d}.json"
            (d / fn).write_text(json.dumps(L.to_record(), indent=1, sort_keys=True))
            index["si"].append({"file": fn, "size": L.n, "length": length(L), "simple": is_simple(L)})
        (d / "index.json").write_text(json.dumps(index, indent=1, sort_keys=True))

    def load_cache(self, directory):
        d = Path(directory)
        index = json.loads((d / "index.json").read_text())
        self._si = _dedupe(FiniteLattice.from_record(json.loads((d / e["file"]).read_text())) for e in index["si"])
        return index


# --------------------------------------------------------- Con prescribed

@dataclass
class MemberSearch:
    """Result of :func:`members_with_conc`. ``complete`` is False when some
    part of the search space was skipped; then absence of a member proves nothing.
    """

    members: list
    complete: bool
    bounds: dict
    skipped: list = field(default_factory=list)

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)


def _up_interval(S, m):
    up = [k for k in range(S.n) if S.leq[m, k]]
    return S.sublattice(up)


def _subdirect_sublattices(P, max_size, max_length, cap):
    """Sublattices of a direct product containing 0 and 1 and projecting onto
    every factor, within bounds, by Close-by-One. Returns (masks, complete)."""
    n = P.n
    coords = P.coords
    sizes = [F.n for F in P.factors]

    def subdirect(mask):
        idx = bits(mask)
        return all(len({coords[i][k] for i in idx}) == sizes[k] for k in range(len(sizes)))

    def fits(mask):
        size = bin(mask).count("1")
        if max_size is not None:
            if size > max_size:
                return False
            # each new element adds at most one value per coordinate
            idx = bits(mask)
            missing = max(sizes[k] - len({coords[i][k] for i in idx}) for k in range(len(sizes)))
            if size + missing > max_size:
                return False
        # sublattices only grow along the search tree, and so does their length
        return max_length is None or length(P.sublattice(bits(mask))) <= max_length

    start = closure_mask(P, mask_of([P.bottom, P.top]))
    if not fits(start):
        return [], True
    out = []
    visited = 1
    stack = [(start, 0)]
    while stack:
        mask, i0 = stack.pop()
        if subdirect(mask):
            out.append(mask)
        for i in range(i0, n):
            if mask >> i & 1:
                continue
            B = closure_mask(P, mask | 1 << i)
            if (B & ~mask) & ((1 << i) - 1) or not fits(B):
                continue
            visited += 1
            if visited > cap:
                return out, False
            stack.append((B, i + 1))
    return out, True


def members_with_conc(spec, S, max_size=None, max_length=None, exact_length=None,
                      subdirect=True, max_product=512, cap=20000):
    """Members ``A`` of ``spec`` with ``Con A ≅ S`` within the bounds.

    Two sources: quotients of sublattices of generators (exact), then
    subdirect sublattices of products ``∏_{m ∈ M(S)} F_m`` where each ``F_m`` is
    an SI member with ``Con F_m ≅ ↑m``. Products with more than
    ``max_product`` elements are skipped and the result marked incomplete;
    so is the whole result when ``subdirect`` is False.
    """
    if exact_length is not None:
        max_length = exact_length if max_length is None else min(max_length, exact_length)
    bounds = {"max_size": max_size, "max_length": max_length, "exact_length": exact_length,
              "subdirect": subdirect, "max_product": max_product, "cap": cap}
    skipped = []
    complete = True

    def ok(A):
        if max_size is not None and A.n > max_size:
            return False
        if max_length is not None and length(A) > max_length:
            return False
        if exact_length is not None and length(A) != exact_length:
            return False
        C = con_lattice(A)
        return len(C) == S.n and find_isomorphism(C.as_semilattice(), S) is not None

    found = [A for A in spec.hs_members() if ok(A)]

    if S.n == 1:
        return MemberSearch(_dedupe(found), True, bounds)
    if not subdirect:
        return MemberSearch(_dedupe(found), False, bounds, [{"reason": "subdirect phase disabled"}])
    irreducible = [k for k in range(S.n) if len(S.upper_covers(k)) == 1]
    factor_pools = []
    for m in irreducible:
        U = _up_interval(S, m)
        pool = [F for F in spec.si_members() if len(con_lattice(F)) == U.n
                and find_isomorphism(con_lattice(F).as_semilattice(), U) is not None
                and (max_size is None or F.n <= max_size)
                and (max_length is None or length(F) <= max_length)]
        if max_size is not None and len(irreducible) > 1:
            # a factor of size max_size would be isomorphic to A, making A irreducible
            pool = [F for F in pool if F.n < max_size]
        factor_pools.append(pool)

    def combos(k, prefix):
        if k == len(factor_pools):
            yield list(prefix)
            return
        for F in factor_pools[k]:
            prefix.append(F)
            yield from combos(k + 1, prefix)
            prefix.pop()

    done = set()
    for combo in combos(0, []):
        key = tuple(sorted(canonical_form(F) for F in combo))
        if key in done:
            continue
        done.add(key)
        size = 1
        for F in combo:
            size *= F.n
        names = [F.name or f"<{F.n}>" for F in combo]
        if size > max_product:
            complete = False
            skipped.append({"factors": names, "size": size, "reason": "product too large"})
            continue
        P = direct_product(*combo)
        masks, full = _subdirect_sublattices(P, max_size, max_length, cap)
        if not full:
            complete = False
            skipped.append({"factors": names, "size": size, "reason": "sublattice cap"})
        for mask in masks:
            A = P.sublattice(bits(mask))
            if ok(A):
                found.append(A)
    return MemberSearch(_dedupe(found), complete, bounds, skipped)


# ------------------------------------------------------ embedding transfer

def embedding_transfer(spec1, spec2, candidates=None):
    """For each non-simple ``A`` (default: sublattices of ``spec1``'s
    generators) that embeds in a simple member of ``spec1``, find a simple
    member of ``spec2`` it embeds into. Returns a list of rows
    ``(A, host1, host2)`` with ``host2`` None on failure.
    """
    simple1 = spec1.simple_members()
    simple2 = sorted(spec2.simple_members(), key=lambda L: L.n)
    if candidates is None:
        candidates = spec1.subalgebras()
    rows = []
    for A in candidates:
        if is_simple(A):
            continue
        host1 = next((H for H in simple1 if embeds(A, H)), None)
        if host1 is None:
            continue
        host2 = next((H for H in simple2 if embeds(A, H)), None)
        rows.append((A, host1, host2))
    return rows

