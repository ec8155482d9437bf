"""Finite lattices, their congruence lattices, and lifting problems for
diagrams of join-semilattices."""

__version__ = "0.1.0"

from .lattice import (
    FiniteLattice,
    JoinSemilattice0,
    LatticeHom,
    NotALattice,
    ResourceExhausted,
    ValidationError,
    canonical_form,
    direct_product,
    is_isomorphic,
    length,
)
from .poset import CapacityExhausted, FinitePoset, PosetError
from .congruence import Congruence, ConLattice, con_lattice, principal_congruence, quotient
from .variety import VarietySpec, members_with_conc
from .diagram import Diagram, LiftBounds, Lifting, NoneWithinBounds, bounded_lift_search, verify_lifting
from .io import Fixtures
