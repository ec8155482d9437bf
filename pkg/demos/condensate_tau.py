"""Condensates over the finite T_k coverings, θ-ideals, τ, and σ-selection."""
from latlift import Fixtures
from latlift.condensate import Condensate, check_theta_ideal, smallest_support, tau_map
from latlift.poset import (
    CapacityExhausted,
    FinitePoset,
    build_tree_covering,
    covering_isomorphism,
    extreme_ideals,
    finite_T_covering,
    monotone_hull,
    sigma_select,
)

fx = Fixtures()

# T_3: a root below three incomparable points, normed onto 0 < 1
nc = finite_T_covering(3)
print("T_3 ids:", nc.U.ids, "norm:", nc.norm)
print("extreme ideals:", [e.generator for e in extreme_ideals(nc)])

# a semilattice diagram constant at the 2-element chain
D = fx.diagram("const2")
cond = Condensate(D, nc)
print("Cond(const2, T_3):", len(cond), "elements")
a = cond.element({"bot": "0", "0": "1", "1": "0", "2": "0"})
print("smallest support of", a.as_dict(), "is", sorted(smallest_support(a).members))
print("θ-ideal checks:", {e.generator: check_theta_ideal(cond, e) for e in extreme_ideals(nc)})

# τ from Con Cond(S1 ↪ T1) to the condensate of Con∘(S1 ↪ T1)
A = fx.diagram("S1_in_T1")
rep = tau_map(A, finite_T_covering(2))
print("τ table size:", len(rep.tau), "quasi-lifting:", rep.ok)
for row in rep.ideals:
    print("  ideal", row["ideal"], "iso", row["iso"], "α = ker p", row["alpha_is_kernel_of_projection"])

# σ-selection: the tree covering of 0 < 1 with capacity 3 is T_3 again
tc = build_tree_covering(FinitePoset.chain(2), 3)
print("tree covering ≅ T_3:", covering_isomorphism(tc, finite_T_covering(3)))
F = monotone_hull(tc, {"{}": {"{1:0}"}})
print("σ with value 0 excluded:", {i: s.generator for i, s in sigma_select(tc, F).items()})
try:
    sigma_select(build_tree_covering(FinitePoset.chain(2), 1), monotone_hull(
        build_tree_covering(FinitePoset.chain(2), 1), {"{}": {"{1:0}"}}))
except CapacityExhausted as exc:
    print("capacity 1:", exc)
