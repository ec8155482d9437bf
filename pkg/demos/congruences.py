"""Congruence lattices of the bundled lattices, a quotient, and a Mal'cev chain."""
from latlift import Fixtures, con_lattice, principal_congruence, quotient
from latlift.congruence import boolean_decomposition, is_boolean_lattice, malcev_entailment
from latlift.lattice import doubly_irreducible, hasse_text, is_isomorphic, maximal_sublattices

fx = Fixtures()
T1 = fx.lattice("T1")
print(T1, "doubly irreducible:", sorted(doubly_irreducible(T1)))

# Con of each generator and of the three sublattices of the square
for name in ["T1", "T2", "T3", "T4", "S0", "S1", "S2"]:
    C = con_lattice(fx.lattice(name))
    k = is_boolean_lattice(C.as_semilattice())
    print(f"{name:3s} |Con| = {len(C):2d}   Boolean rank {k}")

# removing one doubly irreducible element gives one of the three smaller generators
refs = {n: fx.lattice(n) for n in ("T2", "T3", "T4")}
for S in maximal_sublattices(T1):
    gone = (set(T1.ids) - set(S.ids)).pop()
    print(f"T1-{{{gone}}} ≅", [n for n, R in refs.items() if is_isomorphic(S, R)])

# S1 collapses onto a 5-element simple lattice when bot ~ a5
S1 = fx.lattice("S1")
theta = principal_congruence(S1, "bot", "a5")
Q, p = quotient(S1, theta)
print("S1/Θ(bot,a5) blocks:", theta.block_ids())
print(hasse_text(Q))

# why bot ~ top in T1 once bot ~ a5: a chain of translated copies of (bot, a5)
w = malcev_entailment(T1, ("bot", "top"), [("bot", "a5")])
print("chain:", " -> ".join(w.chain))
for step in w.steps:
    print("   via", step.translations or "(the pair itself)", "swapped" if step.swapped else "")

# Con S0 splits into four 2-element factors
C = con_lattice(fx.lattice("S0"))
d = boolean_decomposition(fx.lattice("S0"), C.full)
print("S0: factors", [len(F) for F in d.factors], "iso:", d.is_isomorphism)
