"""Structural non-lifting certificate for the square diagram of Boolean
semilattices over ``HSP(T2, T3, T4)``.

Each step recomputes a finite enumeration and compares it with the sets the
refutation relies on (``EXPECTED``). Any disagreement raises
:class:`CertificateFailure` with the step name.
"""
from __future__ import annotations

from itertools import combinations_with_replacement

from .congruence import con_lattice, con_of_hom, is_boolean_lattice
from .diagram import NonLiftingCertificate, separates_zero
from .lattice import (
    LatticeHom,
    all_sublattices,
    canonical_form,
    embeds,
    find_isomorphism,
    length,
)

# Sets the argument relies on, written as removed elements of the named lattice.
EXPECTED = {
    "simple_length4": [("T2", ()), ("T3", ()), ("T4", ()), ("T4", ("a4",))],
    "tops": ["T2", "T3", "T4"],
    "maximal": {
        "T2": [("a1",), ("a2",), ("a3",), ("a4",), ("a6",)],
        "T4": [("a1",), ("a2",), ("a5",), ("a6",), ("a4", "t1"), ("a4", "t2")],
    },
    "survivors": {
        "T2": [("a6",)],
        "T4": [("a1",), ("a2",)],
    },
    # T3 is handled through its order dual, T2
    "dual_of": {"T3": "T2"},
    "extra_2x2": {"T4": [("a1",), ("a2",), ("a1", "a2")]},
}


class CertificateFailure(AssertionError):
    def __init__(self, step, message, trace=None):
        super().__init__(f"step {step}: {message}")
        self.step = step
        self.trace = trace


def con_type(L):
    """``"2^k"`` when Con L is Boolean, else its size."""
    k = is_boolean_lattice(con_lattice(L).as_semilattice())
    return f"2^{k}" if k is not None else f"|Con|={len(con_lattice(L))}"


def _removed(B, S):
    return tuple(sorted(set(B.ids) - set(S.ids)))


def _has_quotient_2(L):
    return any(t.nblocks == 2 for t in con_lattice(L))


def maximal_with_con(B, k, only_length=None):
    """Sublattices of ``B`` maximal for containment among those with Con ≅ 2^k."""
    good = [S for S in all_sublattices(B) if len(con_lattice(S)) == 2 ** k
            and is_boolean_lattice(con_lattice(S).as_semilattice()) == k
            and (only_length is None or length(S) == only_length)]
    sets = [frozenset(S.ids) for S in good]
    return [S for S, s in zip(good, sets) if not any(s < o for o in sets)], good


def _dual_map(B, src):
    """Element map ``src -> B`` realising ``B ≅ src^d``, or None."""
    return find_isomorphism(src.dual(), B)


def section7_certificate(spec2, D, expected=EXPECTED):
    """Replay the refutation that ``D`` has no lifting in ``spec2``."""
    steps, cases = [], []
    gens = {g.name: g for g in spec2.generators}

    # (a) maps of a lifting are one-to-one
    P = D.index
    rows = []
    for a in P.ids:
        for b in P.ids:
            if a != b and P.le(a, b):
                rows.append({"from": a, "to": b, "separates_zero": separates_zero(D.arrow(a, b))})
    ok = all(r["separates_zero"] for r in rows)
    steps.append({"step": "a", "claim": "every arrow separates 0, so lifting maps are embeddings",
                  "arrows": rows, "ok": ok})
    if not ok:
        raise CertificateFailure("a", "some arrow of the diagram does not separate 0", steps)
    top_node = P.ids[P.linear_extension()[-1]]
    bottom_node = P.ids[P.linear_extension()[0]]
    if len(D.node(top_node)) != 2:
        raise CertificateFailure("a", "top node is not the two-element semilattice", steps)

    # (b) the top lattice is simple of length four
    def named(name, removed):
        if name not in gens:
            raise CertificateFailure("b", f"{name} is not a generator of the variety", steps)
        return gens[name].without(*removed) if removed else gens[name]

    simple = spec2.simple_members()
    max_len = max(length(L) for L in simple)
    len4 = [L for L in simple if length(L) == 4]
    found = sorted(canonical_form(L) for L in len4)
    want_lattices = [named(n, r) for n, r in expected["simple_length4"]]
    want = sorted(canonical_form(L) for L in want_lattices)
    ident = []
    for L in len4:
        match = [f"{n}-{{{','.join(r)}}}" if r else n for (n, r), W in zip(expected["simple_length4"], want_lattices)
                 if canonical_form(W) == canonical_form(L)]
        ident.append({"size": L.n, "is": match})
    tops = [L for L in len4 if not any(L is not M and L.n < M.n and embeds(L, M) for M in len4)]
    top_names = sorted(m["is"][0] for L, m in zip(len4, ident) if L in tops and m["is"])
    steps.append({"step": "b", "claim": "simple members of length four, up to isomorphism",
                  "simple_members": len(simple), "max_simple_length": max_len,
                  "length4": ident, "tops_under_embedding": top_names,
                  "ok": found == want and max_len <= 4 and top_names == sorted(expected["tops"])})
    if max_len > 4:
        raise CertificateFailure("b", f"a simple member has length {max_len} > 4", steps)
    if found != want:
        raise CertificateFailure("b", "simple length-four members differ from the expected list", steps)
    if top_names != sorted(expected["tops"]):
        raise CertificateFailure("b", f"maximal candidates {top_names} differ from {expected['tops']}", steps)

    B0_type = con_type_semilattice(D.node(bottom_node))

    # (c)-(e) per top lattice
    for name in expected["tops"]:
        B3 = gens[name]
        case = {"B3": name}
        maxi, good = maximal_with_con(B3, 2)
        maxi4, good4 = maximal_with_con(B3, 2, only_length=4)
        got = sorted(_removed(B3, S) for S in maxi)
        got4 = sorted(_removed(B3, S) for S in maxi4)
        if name in expected["maximal"]:
            exp = sorted(tuple(sorted(r)) for r in expected["maximal"][name])
            exp_surv = sorted(tuple(sorted(r)) for r in expected["survivors"][name])
            via = "listed"
        else:
            src = expected["dual_of"][name]
            iso = _dual_map(B3, gens[src])
            if iso is None:
                raise CertificateFailure("c", f"{name} is not dual to {src}", steps)
            tr = lambda rs: sorted(tuple(sorted(iso[x] for x in r)) for r in rs)
            exp = tr(expected["maximal"][src])
            exp_surv = tr(expected["survivors"][src])
            via = f"dual of {src}"
        # inclusions between length-4 sublattices with Con ≅ 2^2 induce isomorphisms
        sets4 = [frozenset(S.ids) for S in good4]
        incl_ok = 0
        for S, s in zip(good4, sets4):
            for K, k in zip(good4, sets4):
                if s < k:
                    f = con_of_hom(LatticeHom.inclusion(S, K))
                    if not (f.is_injective() and f.is_surjective()):
                        raise CertificateFailure("c", f"inclusion into {_removed(B3, K)} is not a Con-isomorphism", steps)
                    incl_ok += 1
        step_c = {"step": "c", "B3": name, "expected_from": via, "maximal_removed": got,
                  "maximal_removed_length4": got4, "con_iso_inclusions_checked": incl_ok,
                  "ok": got == exp and got4 == exp}
        steps.append(step_c)
        if got != exp or got4 != exp:
            raise CertificateFailure("c", f"maximal Con≅2^2 sublattices of {name}: {got} != {exp}", steps)

        surv = [S for S in maxi if not _has_quotient_2(S)]
        got_s = sorted(_removed(B3, S) for S in surv)
        steps.append({"step": "d", "B3": name,
                      "with_quotient_2": sorted(_removed(B3, S) for S in maxi if _has_quotient_2(S)),
                      "survivors": got_s, "ok": got_s == exp_surv})
        if got_s != exp_surv:
            raise CertificateFailure("d", f"survivors for {name}: {got_s} != {exp_surv}", steps)

        pairs = []
        for S1, S2 in combinations_with_replacement(surv, 2):
            common = sorted(set(S1.ids) & set(S2.ids), key=B3.index)
            I = B3.sub_ids(common)
            t = con_type(I)
            pairs.append({"B1": _removed(B3, S1), "B2": _removed(B3, S2),
                          "intersection_removed": _removed(B3, I), "con": t,
                          "contradiction": t != B0_type})
        extra = [{"removed": list(r), "con": con_type(B3.without(*r))}
                 for r in expected["extra_2x2"].get(name, [])]
        closed = bool(pairs) and all(p["contradiction"] for p in pairs) and all(e["con"] == "2^2" for e in extra)
        steps.append({"step": "e", "B3": name, "required": B0_type, "pairs": pairs, "extra": extra, "ok": closed})
        if not closed:
            raise CertificateFailure("e", f"case {name} does not close", steps)
        case["refuted"] = True
        case["reason"] = f"every admissible B1∩B2 has Con {sorted({p['con'] for p in pairs})}, not {B0_type}"
        cases.append(case)

    return NonLiftingCertificate("structural", {"B3_candidates": expected["tops"]}, cases=cases, steps=steps)


def con_type_semilattice(S):
    k = is_boolean_lattice(S)
    return f"2^{k}" if k is not None else f"|Con|={S.n}"
