"""modeflow: exact verification of constant-rate (singular) hybrid automata.

The package decides reachability, non-Zeno schedulability and LTL properties
for multi-mode systems and their weakly-ordered generalizations, using exact
rational linear programming end to end.  A region-graph engine covers
one-variable automata and a bounded symbolic engine serves as the ground
truth oracle for everything else.
"""

from .constraints import LinearConstraint, Polyhedron, Relation, constraint, valuation
from .rationals import Rational, rat, rat_str

__all__ = [
    "LinearConstraint",
    "Polyhedron",
    "Relation",
    "constraint",
    "valuation",
    "Rational",
    "rat",
    "rat_str",
]
