"""Linear constraints and polyhedra over exact rationals.

The data kernel shared by the model types, the LP layer and the symbolic
engine.  A :class:`LinearConstraint` is ``sum(coeffs[x] * x) REL rhs`` with a
zero-free coefficient map; a :class:`Polyhedron` is a finite conjunction of
such constraints over a declared variable tuple.  The empty conjunction is
top; a dedicated marker represents bottom.  Everything here is immutable and
purely syntactic — emptiness/boundedness queries live in
:mod:`modeflow.geometry` because they need the LP solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping

from .rationals import ONE, ZERO, Rational, rat


class Relation(Enum):
    LT = "<"
    LE = "<="
    EQ = "="
    GE = ">="
    GT = ">"

    @property
    def is_strict(self) -> bool:
        return self in (Relation.LT, Relation.GT)

    def closure(self) -> "Relation":
        if self is Relation.LT:
            return Relation.LE
        if self is Relation.GT:
            return Relation.GE
        return self

    def holds(self, lhs, rhs) -> bool:
        if self is Relation.LT:
            return lhs < rhs
        if self is Relation.LE:
            return lhs <= rhs
        if self is Relation.EQ:
            return lhs == rhs
        if self is Relation.GE:
            return lhs >= rhs
        return lhs > rhs


_FLIP = {Relation.GE: Relation.LE, Relation.GT: Relation.LT}


@dataclass(frozen=True, eq=True)
class LinearConstraint:
    """``a1*x1 + ... + an*xn REL rhs`` with exact rational coefficients."""

    coeffs: Mapping[str, Rational]
    relation: Relation
    rhs: Rational

    @staticmethod
    def make(coeffs: Mapping[str, object], relation: Relation, rhs) -> "LinearConstraint":
        """Build a constraint, coercing values and dropping zero coefficients."""
        clean = {v: rat(c) for v, c in coeffs.items() if rat(c) != ZERO}
        return LinearConstraint(clean, relation, rat(rhs))

    def is_trivial(self) -> bool:
        return not self.coeffs

    def trivially_true(self) -> bool:
        return self.is_trivial() and self.relation.holds(ZERO, self.rhs)

    def variables(self) -> set[str]:
        return set(self.coeffs)

    def evaluate(self, valuation: Mapping[str, Rational]) -> bool:
        lhs = sum((c * valuation[v] for v, c in self.coeffs.items()), ZERO)
        return self.relation.holds(lhs, self.rhs)

    def slack(self, valuation: Mapping[str, Rational]) -> Rational:
        """rhs minus lhs for <=-oriented rows (callers orient first)."""
        lhs = sum((c * valuation[v] for v, c in self.coeffs.items()), ZERO)
        return self.rhs - lhs

    def oriented(self) -> "LinearConstraint":
        """Rewrite >=/> as <=/< by negating both sides."""
        if self.relation in _FLIP:
            return LinearConstraint(
                {v: -c for v, c in self.coeffs.items()}, _FLIP[self.relation], -self.rhs
            )
        return self

    def negated(self) -> "LinearConstraint":
        """The complement constraint (a.x <= b  ->  a.x > b, etc.)."""
        opposite = {
            Relation.LT: Relation.GE,
            Relation.LE: Relation.GT,
            Relation.EQ: Relation.EQ,  # complement of = is not linear; callers beware
            Relation.GE: Relation.LT,
            Relation.GT: Relation.LE,
        }
        if self.relation is Relation.EQ:
            raise ValueError("negation of an equality is not a single linear constraint")
        return LinearConstraint(dict(self.coeffs), opposite[self.relation], self.rhs)

    def substitute(self, assignment: Mapping[str, Rational]) -> "LinearConstraint":
        """Plug constants in for some variables."""
        coeffs = {}
        rhs = self.rhs
        for v, c in self.coeffs.items():
            if v in assignment:
                rhs -= c * assignment[v]
            else:
                coeffs[v] = c
        return LinearConstraint(coeffs, self.relation, rhs)

    def shift_variable(self, var: str, delta: Rational) -> "LinearConstraint":
        """Substitute ``var := var + delta`` (used for additive updates)."""
        if var not in self.coeffs:
            return self
        return LinearConstraint(
            dict(self.coeffs), self.relation, self.rhs - self.coeffs[var] * delta
        )

    def canonical(self) -> tuple:
        """Orientation- and scale-independent key.

        Rows are oriented to <=/</=, scaled to a primitive integer vector
        (equalities additionally get a positive leading coefficient), and the
        coefficient map is sorted.  Two constraints are syntactically equal
        for the purposes of invariant sharing and region bookkeeping iff
        their canonical keys match.
        """
        row = self.oriented()
        if not row.coeffs:
            return ((), row.relation.value if not row.trivially_true() else "T", str(row.rhs))
        items = sorted(row.coeffs.items())
        denom_lcm = 1
        for _, c in items:
            denom_lcm = denom_lcm * c.denominator // math.gcd(denom_lcm, c.denominator)
        nums = [int(c * denom_lcm) for _, c in items]
        scale = 0
        for n in nums:
            scale = math.gcd(scale, abs(n))
        sign = 1
        if row.relation is Relation.EQ and nums[0] < 0:
            sign = -1
        factor = rat(sign * denom_lcm, scale)
        return (
            tuple((v, str(c * factor)) for v, c in items),
            row.relation.value,
            str(row.rhs * factor),
        )

    def pretty(self) -> str:
        if not self.coeffs:
            return f"0 {self.relation.value} {self.rhs}"
        parts = []
        for v, c in sorted(self.coeffs.items()):
            if c == ONE:
                parts.append(f"+ {v}")
            elif c == -ONE:
                parts.append(f"- {v}")
            elif c < ZERO:
                parts.append(f"- {-c}*{v}")
            else:
                parts.append(f"+ {c}*{v}")
        text = " ".join(parts).lstrip("+ ")
        return f"{text} {self.relation.value} {self.rhs}"


def constraint(coeffs: Mapping[str, object], op: str, rhs) -> LinearConstraint:
    """Shorthand used pervasively in tests and generators."""
    return LinearConstraint.make(coeffs, Relation(op), rhs)


@dataclass(frozen=True, eq=True)
class Polyhedron:
    """Conjunction of linear constraints over a declared variable tuple.

    An empty constraint list is top; ``is_bottom`` marks the canonical empty
    set.  Emptiness/boundedness/openness are *derived* through the LP layer,
    never cached on the object, so a Polyhedron can be shared freely.
    """

    variables: tuple[str, ...]
    constraints: tuple[LinearConstraint, ...] = ()
    is_bottom: bool = False

    @staticmethod
    def top(variables: Iterable[str]) -> "Polyhedron":
        return Polyhedron(tuple(variables), ())

    @staticmethod
    def bottom(variables: Iterable[str]) -> "Polyhedron":
        return Polyhedron(tuple(variables), (), is_bottom=True)

    @staticmethod
    def of(variables: Iterable[str], rows: Iterable[LinearConstraint]) -> "Polyhedron":
        """Build from rows, resolving trivial rows at construction time."""
        vs = tuple(variables)
        kept = []
        for row in rows:
            if row.is_trivial():
                if row.trivially_true():
                    continue
                return Polyhedron.bottom(vs)
            missing = row.variables() - set(vs)
            if missing:
                raise ValueError(f"constraint uses undeclared variables {sorted(missing)}")
            kept.append(row)
        return Polyhedron(vs, tuple(kept))

    @property
    def is_top(self) -> bool:
        return not self.is_bottom and not self.constraints

    def conjoin(self, other: "Polyhedron") -> "Polyhedron":
        if self.variables != other.variables:
            raise ValueError("conjoin requires identical variable tuples")
        if self.is_bottom or other.is_bottom:
            return Polyhedron.bottom(self.variables)
        return Polyhedron.of(self.variables, self.constraints + other.constraints)

    def with_rows(self, rows: Iterable[LinearConstraint]) -> "Polyhedron":
        if self.is_bottom:
            return self
        return Polyhedron.of(self.variables, self.constraints + tuple(rows))

    def satisfied_by(self, valuation: Mapping[str, Rational]) -> bool:
        if self.is_bottom:
            return False
        return all(row.evaluate(valuation) for row in self.constraints)

    def substitute(self, assignment: Mapping[str, Rational]) -> "Polyhedron":
        if self.is_bottom:
            return self
        remaining = tuple(v for v in self.variables if v not in assignment)
        return Polyhedron.of(remaining, (row.substitute(assignment) for row in self.constraints))

    def canonical_key(self) -> tuple:
        """Syntactic identity modulo row order, scaling and duplicates.

        Used for duplicate-state suppression in the symbolic engine and for
        the shared-invariant check of rank classes.  Tighter duplicates win:
        among rows with the same coefficient vector and orientation we keep
        the binding one only.
        """
        if self.is_bottom:
            return ("bottom",)
        best: dict[tuple, tuple] = {}
        for row in self.constraints:
            key = row.canonical()
            coeffs, rel, rhs_s = key
            if rel == "T":
                continue
            if rel == "=":
                best[(coeffs, "=", rhs_s)] = key
                continue
            slot = (coeffs, "ineq")
            old = best.get(slot)
            if old is None:
                best[slot] = key
                continue
            old_rhs, new_rhs = rat(old[2]), rat(rhs_s)
            if new_rhs < old_rhs or (new_rhs == old_rhs and rel == "<"):
                best[slot] = key
        return tuple(sorted(best.values(), key=repr))


def valuation(values: Mapping[str, object]) -> dict[str, Rational]:
    """Coerce a mapping to an exact-rational valuation."""
    return {v: rat(x) for v, x in values.items()}


def check_total(valuation: Mapping[str, Rational], variables: Iterable[str]) -> None:
    vs = set(variables)
    got = set(valuation)
    if vs != got:
        raise ValueError(f"valuation domain {sorted(got)} != variable set {sorted(vs)}")
