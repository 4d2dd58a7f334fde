"""Affine expressions over LP variables.

LP builders in the package represent every intermediate valuation point as
an affine combination of dwell-time variables, so constraint systems reach
the solver already free of the defining equalities.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .constraints import LinearConstraint, Relation
from .rationals import ZERO, Rational, rat


@dataclass(frozen=True)
class Affine:
    """coeffs . lp_vars + const"""

    coeffs: Mapping[str, Rational] = field(default_factory=dict)
    const: Rational = ZERO

    @staticmethod
    def constant(value) -> "Affine":
        return Affine({}, rat(value))

    @staticmethod
    def var(name: str, scale=1) -> "Affine":
        return Affine({name: rat(scale)}, ZERO)

    def plus(self, other: "Affine") -> "Affine":
        coeffs = dict(self.coeffs)
        for v, c in other.coeffs.items():
            coeffs[v] = coeffs.get(v, ZERO) + c
            if coeffs[v] == ZERO:
                del coeffs[v]
        return Affine(coeffs, self.const + other.const)

    def plus_term(self, name: str, coef: Rational) -> "Affine":
        if coef == ZERO:
            return self
        coeffs = dict(self.coeffs)
        coeffs[name] = coeffs.get(name, ZERO) + coef
        if coeffs[name] == ZERO:
            del coeffs[name]
        return Affine(coeffs, self.const)

    def value(self, assignment: Mapping[str, Rational]) -> Rational:
        return sum((c * assignment[v] for v, c in self.coeffs.items()), self.const)


def bind_constraint(row: LinearConstraint, point: Mapping[str, Affine]) -> LinearConstraint:
    """Rewrite a model-variable constraint as an LP-variable constraint.

    ``point`` maps each model variable to its affine expression; the result
    constrains the LP variables directly with the same relation.
    """
    coeffs: dict[str, Rational] = {}
    const = ZERO
    for var, c in row.coeffs.items():
        expr = point[var]
        const += c * expr.const
        for lp_var, k in expr.coeffs.items():
            coeffs[lp_var] = coeffs.get(lp_var, ZERO) + c * k
    return LinearConstraint.make(coeffs, row.relation, row.rhs - const)
