"""Exact rational linear programming and polyhedral operators.

Feasibility of mixed strict/non-strict systems is decided by maximizing a
slack variable eps: each strict row ``a.x < b`` becomes ``a.x + eps <= b``,
``eps <= 1`` caps the objective, and the system is strictly feasible iff the
optimum is positive.  The optimum is computed by an exact two-phase simplex
with Bland's (smallest-index) anti-cycling rule, run on the *dual* of the
inequality form: the dual has one row per primal variable, so the tableau
stays small even when the constraint count is large.  Infeasibility of a
non-strict system comes out of the same machinery as a verified Farkas
certificate (a nonnegative row combination equal to ``0 <= negative``), and
unbounded objectives come with a verified improving ray.

Fourier-Motzkin projection and the constant-rate time-elapse operator round
out the module; both are exact and both respect strictness.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .constraints import LinearConstraint, Polyhedron, Relation
from .rationals import ONE, ZERO, Rational, rat

__all__ = [
    "LpProblem",
    "LpOutcome",
    "InternalError",
    "BudgetExceeded",
    "lp_feasible",
    "lp_call_count",
    "reset_lp_call_count",
    "project",
    "project_all",
    "time_elapse",
    "is_empty",
    "is_bounded",
    "is_open",
    "contains",
    "contains_strict",
    "verify_farkas",
    "DEFAULT_ROW_BUDGET",
]


class InternalError(AssertionError):
    """A solver self-check failed; indicates a bug, never expected input."""


class BudgetExceeded(RuntimeError):
    """Projection exceeded its row budget (symbolic callers report Unknown)."""


DEFAULT_ROW_BUDGET = 4096

_lp_calls = threading.local()


def lp_call_count() -> int:
    return getattr(_lp_calls, "n", 0)


def reset_lp_call_count() -> None:
    _lp_calls.n = 0


def _bump_lp_calls() -> None:
    _lp_calls.n = getattr(_lp_calls, "n", 0) + 1


@dataclass(frozen=True)
class LpProblem:
    """A constraint system plus an optional linear objective."""

    variables: tuple[str, ...]
    constraints: tuple[LinearConstraint, ...]
    objective: Optional[Mapping[str, Rational]] = None
    direction: str = "max"  # "max" | "min"

    @staticmethod
    def of(variables, constraints, objective=None, direction="max") -> "LpProblem":
        vs = tuple(variables)
        rows = tuple(constraints)
        for row in rows:
            extra = row.variables() - set(vs)
            if extra:
                raise ValueError(f"constraint variable(s) {sorted(extra)} not declared")
        return LpProblem(vs, rows, objective, direction)


@dataclass(frozen=True)
class LpOutcome:
    """Solver verdict.

    ``status`` is one of ``"feasible"``, ``"infeasible"``, ``"unbounded"``.
    A feasible outcome carries a witness that satisfies every constraint
    exactly, strict rows strictly.  An unbounded outcome (only possible with
    an objective) additionally carries a ray along which all closure rows
    stay satisfied while the objective improves.  An infeasible outcome for
    a system without strict rows carries a Farkas certificate mapping
    constraint indices to nonnegative multipliers (equality rows may receive
    either sign) whose combination reads ``0 <= negative``.
    """

    status: str
    witness: Optional[dict[str, Rational]] = None
    optimum: Optional[Rational] = None
    unbounded_direction: Optional[dict[str, Rational]] = None
    farkas: Optional[dict[int, Rational]] = None

    @property
    def is_feasible(self) -> bool:
        return self.status in ("feasible", "unbounded")


# ---------------------------------------------------------------------------
# Dense row form + presolve
# ---------------------------------------------------------------------------

# A working row is (coeffs: list[Rational], rel, rhs, combo) where combo maps
# original constraint indices to multipliers proving the row is that signed
# combination of original (<=-oriented) constraints.


def _to_dense(var_index: Mapping[str, int], row: LinearConstraint, idx: int):
    # combo multipliers are relative to the <=-oriented rewriting of each
    # original row, matching what verify_farkas applies.
    oriented = row.oriented()
    vec = [ZERO] * len(var_index)
    for v, c in oriented.coeffs.items():
        vec[var_index[v]] = c
    return [vec, oriented.relation, oriented.rhs, {idx: ONE}]


def _combo_add(dst: dict, src: dict, factor) -> None:
    for k, c in src.items():
        dst[k] = dst.get(k, ZERO) + factor * c
        if dst[k] == ZERO:
            del dst[k]


def _presolve(nvars: int, rows: list):
    """Substitute singleton equalities and drop trivial/duplicate rows.

    Returns (rows', fixed: dict var_idx -> value, infeasible_combo | None).
    The combo of every surviving row stays a valid signed combination of the
    original rows, so certificates survive presolve.
    """
    fixed: dict[int, Rational] = {}
    while True:
        kept = []
        singleton = None
        for row in rows:
            vec, rel, rhs, combo = row
            support = [i for i, c in enumerate(vec) if c != ZERO]
            if not support:
                if not rel.holds(ZERO, rhs):
                    return rows, fixed, (rel, rhs, combo)
                continue
            if singleton is None and rel is Relation.EQ and len(support) == 1:
                singleton = (support[0], row)
            else:
                kept.append(row)
        if singleton is None:
            rows = kept
            break
        i, (vec, _rel, rhs, combo) = singleton
        value = rhs / vec[i]
        fixed[i] = value
        sub_combo = {k: c / vec[i] for k, c in combo.items()}
        rows = []
        for ovec, orel, orhs, ocombo in kept:
            c = ovec[i]
            if c == ZERO:
                rows.append([ovec, orel, orhs, ocombo])
            else:
                nvec = list(ovec)
                nvec[i] = ZERO
                ncombo = dict(ocombo)
                _combo_add(ncombo, sub_combo, -c)
                rows.append([nvec, orel, orhs - c * value, ncombo])

    # Syntactic dedupe: identical coefficient vectors keep the tighter row.
    out = []
    seen: dict[tuple, int] = {}
    for vec, rel, rhs, combo in rows:
        if rel is Relation.EQ:
            key = (tuple(vec), "=", str(rhs))
            if key in seen:
                continue
            seen[key] = len(out)
        else:
            key = (tuple(vec), "ineq")
            prev = seen.get(key)
            if prev is not None:
                prhs, prel = out[prev][2], out[prev][1]
                if rhs < prhs or (rhs == prhs and rel is Relation.LT):
                    out[prev] = [vec, rel, rhs, combo]
                continue
            seen[key] = len(out)
        out.append([vec, rel, rhs, combo])
    return out, fixed, None


# ---------------------------------------------------------------------------
# Simplex on the dual
# ---------------------------------------------------------------------------


def _solve_max(nvars: int, rows: Sequence[tuple], objective: Sequence[Rational]):
    """max c.y subject to a.y <= b rows, y free.

    rows: sequence of (coeff list, rhs).  Returns one of
      ("optimal", value, y)  -- y is a vertex-ish solution, verified
      ("infeasible", mu)     -- mu: nonneg multipliers with sum mu_j a_j = 0,
                                sum mu_j b_j < 0 (verified)
      ("unbounded", ray)     -- rows.ray <= 0 and c.ray > 0 (verified)
    """
    _bump_lp_calls()
    m = len(rows)
    if m == 0:
        if all(c == ZERO for c in objective):
            return ("optimal", ZERO, [ZERO] * nvars)
        ray = list(objective)
        return ("unbounded", ray)

    # Dual: min b^T lam  s.t.  sum_j lam_j * a_j = c,  lam >= 0.
    # Tableau rows are indexed by primal variables (n of them), columns by
    # lam_0..lam_{m-1} plus one artificial per row.
    n = nvars
    flip = [ONE] * n
    g = list(objective)
    T = [[rows[j][0][i] for j in range(m)] for i in range(n)]
    for i in range(n):
        if g[i] < ZERO:
            flip[i] = -ONE
            g[i] = -g[i]
            T[i] = [-x for x in T[i]]
    for i in range(n):
        T[i].extend(ONE if k == i else ZERO for k in range(n))
        T[i].append(g[i])
    ncols = m + n
    basis = [m + i for i in range(n)]
    live_rows = list(range(n))

    def pivot(pr: int, pc: int, drow: list) -> None:
        row = T[pr]
        inv = ONE / row[pc]
        if inv != ONE:
            T[pr] = row = [x * inv for x in row]
        for r in live_rows:
            if r == pr:
                continue
            f = T[r][pc]
            if f != ZERO:
                other = T[r]
                T[r] = [o - f * x for o, x in zip(other, row)]
        f = drow[pc]
        if f != ZERO:
            for k in range(ncols + 1):
                drow[k] -= f * row[k]
        basis[pr] = pc

    def run_phase(drow: list, allow: int) -> Optional[int]:
        """Bland simplex; returns entering column if unbounded, else None."""
        while True:
            enter = -1
            for j in range(allow):
                if drow[j] < ZERO:
                    enter = j
                    break
            if enter < 0:
                return None
            leave = -1
            best = None
            for r in live_rows:
                coef = T[r][enter]
                if coef > ZERO:
                    ratio = T[r][ncols] / coef
                    if best is None or ratio < best or (ratio == best and basis[r] < basis[leave]):
                        best = ratio
                        leave = r
            if leave < 0:
                return enter
            pivot(leave, enter, drow)

    # Phase 1: minimize sum of artificials.
    drow = [ZERO] * (ncols + 1)
    for j in range(ncols + 1):
        s = ZERO
        for r in live_rows:
            s += T[r][j]
        drow[j] = (ONE if m <= j < ncols else ZERO) - s
    unb = run_phase(drow, m)
    if unb is not None:  # pragma: no cover - phase 1 objective is bounded below
        raise InternalError("phase 1 unbounded")
    value1 = ZERO
    for r in live_rows:
        if basis[r] >= m:
            value1 += T[r][ncols]
    if value1 > ZERO:
        # Dual infeasible: primal unbounded along the phase-1 multipliers.
        ray = [flip[i] * (ONE - drow[m + i]) for i in range(n)]
        for vec, b in rows:
            dot = sum((vec[i] * ray[i] for i in range(n)), ZERO)
            if dot > ZERO:
                raise InternalError("invalid unbounded ray")
        cdot = sum((objective[i] * ray[i] for i in range(n)), ZERO)
        if cdot <= ZERO:
            raise InternalError("unbounded ray does not improve objective")
        return ("unbounded", ray)

    # Drive artificials out of the basis; drop dependent rows.
    for r in list(live_rows):
        if basis[r] >= m:
            pc = next((j for j in range(m) if T[r][j] != ZERO), None)
            if pc is None:
                live_rows.remove(r)
            else:
                pivot(r, pc, drow)

    # Phase 2: minimize b^T lam.
    drow = [ZERO] * (ncols + 1)
    for j in range(m):
        drow[j] = rows[j][1]
    for r in live_rows:
        f = drow[basis[r]]
        if f != ZERO:
            row = T[r]
            for k in range(ncols + 1):
                drow[k] -= f * row[k]
    unb = run_phase(drow, m)
    if unb is not None:
        mu = [ZERO] * m
        mu[unb] = ONE
        for r in live_rows:
            if basis[r] < m:
                mu[basis[r]] = -T[r][unb]
        if any(x < ZERO for x in mu):
            raise InternalError("negative Farkas multiplier")
        comb = [sum((mu[j] * rows[j][0][i] for j in range(m)), ZERO) for i in range(n)]
        if any(x != ZERO for x in comb):
            raise InternalError("Farkas combination does not vanish")
        total = sum((mu[j] * rows[j][1] for j in range(m)), ZERO)
        if total >= ZERO:
            raise InternalError("Farkas combination not contradictory")
        return ("infeasible", mu)

    value = ZERO
    for r in live_rows:
        j = basis[r]
        if j < m:
            value += rows[j][1] * T[r][ncols]

    # Primal solution = dual multipliers, read off the artificial columns
    # (those columns hold B^{-1}); coordinates whose dual row was dropped as
    # dependent are free and set to 0.
    alive = set(live_rows)
    y = [flip[i] * (-drow[m + i]) if i in alive else ZERO for i in range(n)]
    for vec, b in rows:
        if sum((vec[i] * y[i] for i in range(n)), ZERO) > b:
            raise InternalError("extracted witness violates a row")
    if sum((objective[i] * y[i] for i in range(n)), ZERO) != value:
        raise InternalError("witness objective mismatch with dual optimum")
    return ("optimal", value, y)


# ---------------------------------------------------------------------------
# Public feasibility / optimization
# ---------------------------------------------------------------------------


def _feasibility(variables: Sequence[str], constraints: Sequence[LinearConstraint]):
    """Returns (status, witness, farkas) for the conjunction of constraints."""
    var_index = {v: i for i, v in enumerate(variables)}
    rows = [_to_dense(var_index, row, idx) for idx, row in enumerate(constraints)]
    rows, fixed, bad = _presolve(len(variables), rows)
    if bad is not None:
        rel, rhs, combo = bad
        cert = dict(combo)
        if rel is Relation.EQ and rhs > ZERO:
            cert = {k: -c for k, c in cert.items()}
        elif rel is Relation.LT and rhs == ZERO:
            cert = None  # contradiction relies on strictness; no <=-form cert
        return ("infeasible", None, cert)
    free = [i for i in range(len(variables)) if i not in fixed]
    pos = {i: k for k, i in enumerate(free)}
    neps = len(free) + 1
    eps = len(free)
    lp_rows = []
    metas = []  # combo per lp row, or None for the eps cap
    for vec, rel, rhs, combo in rows:
        dense = [vec[i] for i in free]
        if rel is Relation.EQ:
            lp_rows.append((dense + [ZERO], rhs))
            metas.append(combo)
            lp_rows.append(([-c for c in dense] + [ZERO], -rhs))
            metas.append({k: -c for k, c in combo.items()})
        elif rel is Relation.LT:
            lp_rows.append((dense + [ONE], rhs))
            metas.append(combo)
        else:
            lp_rows.append((dense + [ZERO], rhs))
            metas.append(combo)
    cap = [ZERO] * neps
    cap[eps] = ONE
    lp_rows.append((cap, ONE))
    metas.append(None)
    objective = [ZERO] * neps
    objective[eps] = ONE
    result = _solve_max(neps, lp_rows, objective)
    if result[0] == "unbounded":  # pragma: no cover - eps is capped
        raise InternalError("feasibility LP cannot be unbounded")
    if result[0] == "infeasible":
        mu = result[1]
        cert: dict[int, Rational] = {}
        for j, meta in enumerate(metas):
            if mu[j] != ZERO:
                if meta is None:
                    raise InternalError("certificate touches the eps cap")
                _combo_add(cert, meta, mu[j])
        return ("infeasible", None, cert)
    _, value, y = result
    if value <= ZERO:
        return ("infeasible", None, None)
    witness = {}
    for v, i in var_index.items():
        witness[v] = fixed[i] if i in fixed else y[pos[i]]
    for row in constraints:
        if not row.evaluate(witness):
            raise InternalError(f"witness violates {row.pretty()}")
    return ("feasible", witness, None)


def lp_feasible(problem: LpProblem) -> LpOutcome:
    """Decide the system; optimize the objective over its closure if given."""
    status, witness, cert = _feasibility(problem.variables, problem.constraints)
    if status == "infeasible":
        if cert is not None:
            verify_farkas(problem.constraints, cert)
        return LpOutcome("infeasible", farkas=cert)
    if problem.objective is None:
        return LpOutcome("feasible", witness=witness)

    sign = ONE if problem.direction == "max" else -ONE
    var_index = {v: i for i, v in enumerate(problem.variables)}
    closure = [row.oriented() for row in problem.constraints]
    rows = []
    for row in closure:
        vec = [ZERO] * len(problem.variables)
        for v, c in row.coeffs.items():
            vec[var_index[v]] = c
        if row.relation is Relation.EQ:
            rows.append((vec, row.rhs))
            rows.append(([-c for c in vec], -row.rhs))
        else:
            rows.append((vec, row.rhs))
    c = [ZERO] * len(problem.variables)
    for v, coef in (problem.objective or {}).items():
        c[var_index[v]] = sign * rat(coef)
    result = _solve_max(len(problem.variables), rows, c)
    if result[0] == "infeasible":  # pragma: no cover - guarded by phase A
        raise InternalError("closure infeasible after strict feasibility")
    if result[0] == "unbounded":
        ray = {v: result[1][i] for v, i in var_index.items()}
        return LpOutcome("unbounded", witness=witness, unbounded_direction=ray)
    _, value, y = result
    argopt = {v: y[i] for v, i in var_index.items()}
    return LpOutcome("feasible", witness=witness, optimum=sign * value)


def verify_farkas(constraints: Sequence[LinearConstraint], cert: Mapping[int, Rational]) -> None:
    """Check a Farkas certificate exactly; raise InternalError when invalid.

    Multipliers apply to rows rewritten in <= orientation; inequality rows
    must get nonnegative multipliers, equality rows may get either sign, and
    the combination must read ``0 <= negative``.
    """
    total_coeffs: dict[str, Rational] = {}
    total_rhs = ZERO
    for idx, mult in cert.items():
        row = constraints[idx].oriented()
        if row.relation is not Relation.EQ and mult < ZERO:
            raise InternalError("negative multiplier on an inequality row")
        for v, c in row.coeffs.items():
            total_coeffs[v] = total_coeffs.get(v, ZERO) + mult * c
        total_rhs += mult * row.rhs
    if any(c != ZERO for c in total_coeffs.values()):
        raise InternalError("Farkas combination has nonzero coefficients")
    if total_rhs >= ZERO:
        raise InternalError("Farkas combination is not contradictory")


# ---------------------------------------------------------------------------
# Polyhedron queries
# ---------------------------------------------------------------------------


def is_empty(poly: Polyhedron) -> bool:
    if poly.is_bottom:
        return True
    status, _, _ = _feasibility(poly.variables, poly.constraints)
    return status == "infeasible"


def feasible_point(poly: Polyhedron) -> Optional[dict[str, Rational]]:
    """A point strictly satisfying every row, or None when empty."""
    if poly.is_bottom:
        return None
    status, witness, _ = _feasibility(poly.variables, poly.constraints)
    return witness if status == "feasible" else None


def contains(poly: Polyhedron, valuation: Mapping[str, Rational]) -> bool:
    return poly.satisfied_by(valuation)


def contains_strict(poly: Polyhedron, valuation: Mapping[str, Rational]) -> bool:
    """Interior membership: every inequality holds strictly (EQ rows fail)."""
    if poly.is_bottom:
        return False
    for row in poly.constraints:
        o = row.oriented()
        if o.relation is Relation.EQ:
            return False
        lhs = sum((c * valuation[v] for v, c in o.coeffs.items()), ZERO)
        if not lhs < o.rhs:
            return False
    return True


def is_bounded(poly: Polyhedron) -> bool:
    """Bounded iff every coordinate has a finite max and min over the closure."""
    if poly.is_bottom or is_empty(poly):
        return True
    for v in poly.variables:
        for direction in ("max", "min"):
            problem = LpProblem.of(poly.variables, poly.constraints, {v: ONE}, direction)
            if lp_feasible(problem).status == "unbounded":
                return False
    return True


def is_open(poly: Polyhedron) -> bool:
    """Open iff no non-strict row can be made tight inside the set."""
    if poly.is_bottom:
        return True
    if is_empty(poly):
        return True
    for row in poly.constraints:
        o = row.oriented()
        if o.relation is Relation.EQ:
            return False
        if o.relation is Relation.LE:
            tight = LinearConstraint(dict(o.coeffs), Relation.EQ, o.rhs)
            status, _, _ = _feasibility(poly.variables, poly.constraints + (tight,))
            if status == "feasible":
                return False
    return True


# ---------------------------------------------------------------------------
# Fourier-Motzkin projection and time elapse
# ---------------------------------------------------------------------------


def _fm_eliminate(rows: list[LinearConstraint], var: str, budget: int) -> list[LinearConstraint]:
    eq_row = next((r for r in rows if r.relation is Relation.EQ and var in r.coeffs), None)
    out: list[LinearConstraint] = []
    if eq_row is not None:
        # Substitute var from the equality: var = (rhs - rest)/coef.
        coef = eq_row.coeffs[var]
        for row in rows:
            if row is eq_row:
                continue
            if var not in row.coeffs:
                out.append(row)
                continue
            f = row.coeffs[var] / coef
            coeffs = dict(row.coeffs)
            del coeffs[var]
            for v, c in eq_row.coeffs.items():
                if v == var:
                    continue
                coeffs[v] = coeffs.get(v, ZERO) - f * c
            out.append(
                LinearConstraint.make(coeffs, row.relation, row.rhs - f * eq_row.rhs)
            )
        return out
    lower, upper = [], []
    for row in rows:
        o = row.oriented()
        c = o.coeffs.get(var, ZERO)
        if c == ZERO:
            out.append(row)
        elif c > ZERO:
            upper.append(o)
        else:
            lower.append(o)
    for lo in lower:
        for up in upper:
            # lo: a.x + cl*var <= bl (cl<0) ; up: a'.x + cu*var <= bu (cu>0)
            cl, cu = lo.coeffs[var], up.coeffs[var]
            coeffs: dict[str, Rational] = {}
            for v, c in lo.coeffs.items():
                if v != var:
                    coeffs[v] = coeffs.get(v, ZERO) + c * cu
            for v, c in up.coeffs.items():
                if v != var:
                    coeffs[v] = coeffs.get(v, ZERO) - c * cl
            rel = (
                Relation.LT
                if (lo.relation is Relation.LT or up.relation is Relation.LT)
                else Relation.LE
            )
            out.append(LinearConstraint.make(coeffs, rel, lo.rhs * cu - up.rhs * cl))
            if len(out) > budget:
                raise BudgetExceeded(f"projection exceeded {budget} rows")
    return out


def _prune(rows: Iterable[LinearConstraint]) -> tuple[list[LinearConstraint], bool]:
    """Drop trivial and syntactically subsumed rows; report contradiction."""
    best: dict[tuple, LinearConstraint] = {}
    for row in rows:
        if row.is_trivial():
            if row.trivially_true():
                continue
            return [], True
        o = row.oriented()
        coeffs, rel, rhs_s = o.canonical()
        if rel == "=":
            best[(coeffs, "=", rhs_s)] = o
            continue
        slot = (coeffs, "ineq")
        prev = best.get(slot)
        if prev is None:
            best[slot] = o
            continue
        if o.rhs < prev.rhs or (o.rhs == prev.rhs and o.relation is Relation.LT):
            best[slot] = o
    return list(best.values()), False


def project(poly: Polyhedron, var: str, budget: int = DEFAULT_ROW_BUDGET) -> Polyhedron:
    """Exact Fourier-Motzkin elimination of one variable."""
    if var not in poly.variables:
        raise ValueError(f"unknown variable {var!r}")
    remaining = tuple(v for v in poly.variables if v != var)
    if poly.is_bottom:
        return Polyhedron.bottom(remaining)
    rows = _fm_eliminate(list(poly.constraints), var, budget)
    rows, contradiction = _prune(rows)
    if contradiction:
        return Polyhedron.bottom(remaining)
    return Polyhedron.of(remaining, rows)


def project_all(poly: Polyhedron, keep: Sequence[str], budget: int = DEFAULT_ROW_BUDGET) -> Polyhedron:
    out = poly
    for v in [v for v in poly.variables if v not in keep]:
        out = project(out, v, budget)
    return out


_ELAPSE_VAR = "__tau"


def time_elapse(
    poly: Polyhedron,
    rate: Mapping[str, Rational],
    invariant: Polyhedron,
    budget: int = DEFAULT_ROW_BUDGET,
) -> Polyhedron:
    """{v + rate*t : v in poly & invariant, t >= 0} intersected with invariant.

    Convexity of the invariant makes endpoint membership sufficient for the
    whole dwell segment, so the result is exactly the set of valuations
    reachable by a nonnegative dwell that respects the invariant throughout.
    """
    if poly.variables != invariant.variables:
        raise ValueError("time_elapse requires matching variable tuples")
    if poly.is_bottom or invariant.is_bottom:
        return Polyhedron.bottom(poly.variables)
    variables = poly.variables + (_ELAPSE_VAR,)
    rows: list[LinearConstraint] = []
    # Start point (y - rate*tau) must lie in poly and in the invariant.
    for row in tuple(poly.constraints) + tuple(invariant.constraints):
        coeffs = dict(row.coeffs)
        shift = sum(
            (row.coeffs.get(v, ZERO) * rate.get(v, ZERO) for v in poly.variables), ZERO
        )
        if shift != ZERO:
            coeffs[_ELAPSE_VAR] = -shift
        rows.append(LinearConstraint.make(coeffs, row.relation, row.rhs))
    # End point stays in the invariant; dwell is nonnegative.
    rows.extend(invariant.constraints)
    rows.append(LinearConstraint.make({_ELAPSE_VAR: ONE}, Relation.GE, ZERO))
    lifted = Polyhedron.of(variables, rows)
    if lifted.is_bottom:
        return Polyhedron.bottom(poly.variables)
    return project(lifted, _ELAPSE_VAR, budget)
