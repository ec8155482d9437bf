"""The Boolean square lifts in HSP(T1) and does not lift in HSP(T2, T3, T4)."""
from latlift import Fixtures, bounded_lift_search, verify_lifting
from latlift.certificate import section7_certificate
from latlift.diagram import apply_conc

fx = Fixtures()
D = fx.diagram("Dvec")
V1, V2 = fx.variety("V1"), fx.variety("V2")
print("nodes:", {i: D.node(i).n for i in D.index.ids})
print("arrows:", D.index.covers())

# the square of sublattices S0 ⊂ S1, S2 ⊂ T1
A = fx.diagram("square")
xi = verify_lifting(A, D)
print("square lifts D:", xi is not None)
for i, h in sorted(xi.maps.items()):
    print(f"  ξ_{i}: {h.source.n} -> Con {A.node(i).name} ({h.target.n})")

# an unguided search finds some lifting, not necessarily the square
res = bounded_lift_search(D, V1)
print("search:", {i: L.n for i, L in sorted(res.diagram.nodes.items())})
print("Con∘search ≅ D:", verify_lifting(res.diagram, D) is not None)
print("Con∘square nodes:", {i: S.n for i, S in apply_conc(A).nodes.items()})

# in V2 every candidate top lattice leads to the wrong Con at the bottom
cert = section7_certificate(V2, D)
for step in cert.steps:
    extra = step.get("maximal_removed") or step.get("survivors") or ""
    print(f"  ({step['step']}) {step.get('B3', ''):3s} ok={step['ok']} {extra}")
for case in cert.cases:
    print(f"B3 = {case['B3']}: {case['reason']}")
