"""Decision procedures for weakly-ordered automata.

Runs of a weak automaton never revisit a lower rank, so the shape of any run
compresses to its *type*: the sequence of visited rank classes joined by the
boundary actions that crossed between them.  Per type, feasibility of some
run of that shape collapses to one linear program over per-class entry/exit
valuations and per-mode dwell times; reachability and schedulability then
enumerate the finitely many types (shortest first, ties by action names) and
test each.

Boundary guards are imposed on the pre-transition exit valuation and updates
produce the next entry valuation, matching the timed-transition rule (dwell,
then guard, then update).  Prefix pruning drops a type extension when the
constraints up to its last class are already infeasible; the partial system
is a subsystem of every extension's, so pruning never changes verdicts.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator, Mapping, Optional, Sequence

from .affine import Affine, bind_constraint
from .cms import DwellSolution, PreconditionViolation, class_cycle_steps, class_run_segment
from .constraints import LinearConstraint, Polyhedron, Relation, constraint
from .geometry import LpProblem, contains_strict, is_empty, lp_feasible
from .model import (
    HybridAutomaton,
    RankAssignment,
    Transition,
    UpdateKind,
    infer_ranks,
)
from .rationals import ONE, ZERO, Rational, rat
from .runs import Lasso, Step, TimedRun, replay_lasso, replay_run

__all__ = [
    "RunType",
    "TypeLpSolution",
    "MalformedType",
    "ReachVerdict",
    "SchedVerdict",
    "enumerate_run_types",
    "type_reach_lp",
    "type_sched_lp",
    "wsha_reachable",
    "wsha_schedulable",
]


class MalformedType(ValueError):
    pass


@dataclass(frozen=True)
class RunType:
    """Alternating ranks and boundary actions <n0, b1, n1, ..., bp, np>."""

    ranks: tuple[int, ...]
    actions: tuple[str, ...]

    def __post_init__(self):
        if len(self.ranks) != len(self.actions) + 1:
            raise MalformedType("type needs one more rank than actions")

    def extend(self, action: str, rank: int) -> "RunType":
        return RunType(self.ranks + (rank,), self.actions + (action,))

    def pretty(self) -> str:
        parts = [str(self.ranks[0])]
        for action, rank in zip(self.actions, self.ranks[1:]):
            parts.append(f"-{action}->")
            parts.append(str(rank))
        return "<" + " ".join(parts) + ">"


@dataclass(frozen=True)
class TypeLpSolution:
    """Concrete entry/exit valuations and dwell times per class position."""

    entries: tuple[dict[str, Rational], ...]
    exits: tuple[dict[str, Rational], ...]
    dwells: tuple[dict[str, Rational], ...]


def _boundary_edges(automaton: HybridAutomaton, ranks: RankAssignment):
    """rank -> sorted [(action, target_rank)] over rank-increasing actions."""
    out: dict[int, list[tuple[str, int]]] = {r: [] for r in ranks.classes}
    for action in sorted(automaton.transitions):
        t = automaton.transitions[action]
        a, b = ranks.rank[t.source], ranks.rank[t.target]
        if a < b:
            out[a].append((action, b))
    return out


def enumerate_run_types(
    automaton: HybridAutomaton, ranks: RankAssignment, start_mode: str
) -> Iterator[RunType]:
    """All types from start_mode's class, by length then action order."""
    edges = _boundary_edges(automaton, ranks)
    level = [RunType((ranks.rank[start_mode],), ())]
    while level:
        nxt: list[RunType] = []
        for t in level:
            yield t
            for action, target_rank in edges[t.ranks[-1]]:
                nxt.append(t.extend(action, target_rank))
        level = nxt


def _validate_type(
    automaton: HybridAutomaton, ranks: RankAssignment, sigma: RunType
) -> list[Transition]:
    crossings = []
    for i, action in enumerate(sigma.actions):
        t = automaton.transitions.get(action)
        if t is None:
            raise MalformedType(f"unknown action {action!r}")
        if ranks.rank[t.source] != sigma.ranks[i] or ranks.rank[t.target] != sigma.ranks[i + 1]:
            raise MalformedType(f"action {action!r} does not cross {sigma.ranks[i]} -> {sigma.ranks[i + 1]}")
        if sigma.ranks[i] >= sigma.ranks[i + 1]:
            raise MalformedType("type ranks must strictly increase")
        crossings.append(t)
    for r in sigma.ranks:
        if r not in ranks.classes:
            raise MalformedType(f"unknown rank {r}")
    return crossings


def _type_system(
    automaton: HybridAutomaton,
    ranks: RankAssignment,
    sigma: RunType,
    start: Mapping[str, Rational],
):
    """LP variables, per-position entry/exit points and base row set."""
    crossings = _validate_type(automaton, ranks, sigma)
    lp_vars: list[str] = []
    rows: list[LinearConstraint] = []
    entries: list[dict[str, Affine]] = []
    exits: list[dict[str, Affine]] = []
    point: dict[str, Affine] = {x: Affine.constant(start[x]) for x in automaton.variables}
    for i, rank in enumerate(sigma.ranks):
        cls = ranks.classes[rank]
        entries.append(dict(point))
        exit_point = dict(point)
        for m in sorted(cls.modes):
            var = f"t{i}_{m}"
            lp_vars.append(var)
            rows.append(constraint({var: 1}, ">=", 0))
            rate = automaton.modes[m].rate
            exit_point = {
                x: exit_point[x].plus_term(var, rate[x]) for x in automaton.variables
            }
        exits.append(exit_point)
        for row in cls.safety.constraints:
            rows.append(bind_constraint(row, entries[i]))
            rows.append(bind_constraint(row, exit_point))
        if i < len(crossings):
            t = crossings[i]
            for row in t.guard.constraints:
                rows.append(bind_constraint(row, exit_point))
            point = dict(exit_point)
            for up in t.updates:
                if up.kind is UpdateKind.ADD:
                    raise MalformedType(f"additive update on boundary action {t.action!r}")
                point[up.variable] = Affine.constant(up.amount)
    return lp_vars, entries, exits, rows


def _solve_type(automaton, ranks, sigma, lp_vars, entries, exits, rows) -> Optional[TypeLpSolution]:
    out = lp_feasible(LpProblem.of(tuple(lp_vars), tuple(r for r in rows if not r.trivially_true())))
    if out.status != "feasible":
        return None
    w = out.witness
    concrete_entries = []
    concrete_exits = []
    dwells = []
    for i, rank in enumerate(sigma.ranks):
        cls = ranks.classes[rank]
        concrete_entries.append({x: entries[i][x].value(w) for x in automaton.variables})
        concrete_exits.append({x: exits[i][x].value(w) for x in automaton.variables})
        dwells.append({m: w[f"t{i}_{m}"] for m in sorted(cls.modes)})
    return TypeLpSolution(tuple(concrete_entries), tuple(concrete_exits), tuple(dwells))


def type_reach_lp(
    automaton: HybridAutomaton,
    ranks: RankAssignment,
    sigma: RunType,
    start: Mapping[str, Rational],
    target: Polyhedron,
) -> Optional[TypeLpSolution]:
    lp_vars, entries, exits, rows = _type_system(automaton, ranks, sigma, start)
    rows += [bind_constraint(r, exits[-1]) for r in target.constraints]
    return _solve_type(automaton, ranks, sigma, lp_vars, entries, exits, rows)


def type_sched_lp(
    automaton: HybridAutomaton,
    ranks: RankAssignment,
    sigma: RunType,
    start: Mapping[str, Rational],
) -> Optional[TypeLpSolution]:
    """Reach LP without target, plus zero-sum unit-time rows for the last class."""
    lp_vars, entries, exits, rows = _type_system(automaton, ranks, sigma, start)
    last = len(sigma.ranks) - 1
    cls = ranks.classes[sigma.ranks[last]]
    for x in automaton.variables:
        coeffs = {f"t{last}_{m}": automaton.modes[m].rate[x] for m in sorted(cls.modes)}
        rows.append(constraint(coeffs, "=", 0))
    rows.append(constraint({f"t{last}_{m}": 1 for m in sorted(cls.modes)}, "=", 1))
    return _solve_type(automaton, ranks, sigma, lp_vars, entries, exits, rows)


def type_prefix_feasible(
    automaton: HybridAutomaton,
    ranks: RankAssignment,
    sigma: RunType,
    start: Mapping[str, Rational],
) -> bool:
    lp_vars, entries, exits, rows = _type_system(automaton, ranks, sigma, start)
    return _solve_type(automaton, ranks, sigma, lp_vars, entries, exits, rows) is not None


# ---------------------------------------------------------------------------
# Search
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReachVerdict:
    run_type: Optional[RunType]
    witness: Optional[TimedRun]
    start_mode: Optional[str]
    types_checked: int

    @property
    def yes(self) -> bool:
        return self.run_type is not None


@dataclass(frozen=True)
class SchedVerdict:
    run_type: Optional[RunType]
    witness: Optional[Lasso]
    start_mode: Optional[str]
    types_checked: int

    @property
    def yes(self) -> bool:
        return self.run_type is not None


def _start_modes(automaton, ranks, start) -> list[str]:
    out = []
    for m in sorted(set(automaton.initial)):
        if contains_strict(ranks.class_of(m).safety, start):
            out.append(m)
    if not out:
        raise PreconditionViolation(
            "start valuation is not strictly inside any initial mode's safety set"
        )
    return out


def stitch_reach_run(
    automaton: HybridAutomaton,
    ranks: RankAssignment,
    sigma: RunType,
    sol: TypeLpSolution,
    start_mode: str,
) -> TimedRun:
    """Concatenate per-class segments and boundary actions; replay-checked."""
    steps: list[Step] = []
    mode = start_mode
    for i, rank in enumerate(sigma.ranks):
        cls = ranks.classes[rank]
        crossing = (
            automaton.transitions[sigma.actions[i]] if i < len(sigma.actions) else None
        )
        exit_mode = crossing.source if crossing is not None else None
        seg = class_run_segment(
            automaton,
            cls,
            mode,
            sol.entries[i],
            DwellSolution(sol.dwells[i], rank),
            exit_mode,
        )
        steps.extend(seg)
        if crossing is not None:
            steps.append(Step(crossing.source, ZERO, crossing.action))
            mode = crossing.target
    run = TimedRun(dict(sol.entries[0]), tuple(steps), dict(sol.exits[-1]))
    replay_run(automaton, run)
    return run


def _search(
    automaton: HybridAutomaton,
    ranks: RankAssignment,
    start: Mapping[str, Rational],
    start_mode: str,
    accept,
    final_ok,
    prune: bool,
    jobs: int,
):
    """Shared enumeration loop; accept(sigma) returns a solution or None."""
    checked = 0
    edges = _boundary_edges(automaton, ranks)
    level = [RunType((ranks.rank[start_mode],), ())]
    while level:
        candidates = [t for t in level if final_ok(t.ranks[-1])]
        if jobs > 1 and len(candidates) > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(accept, candidates))
        else:
            results = [accept(t) for t in candidates]
        checked += len(candidates)
        for sigma, sol in zip(candidates, results):
            if sol is not None:
                return sigma, sol, checked
        nxt: list[RunType] = []
        for t in level:
            if not edges[t.ranks[-1]]:
                continue
            if prune and not type_prefix_feasible(automaton, ranks, t, start):
                continue
            for action, target_rank in edges[t.ranks[-1]]:
                nxt.append(t.extend(action, target_rank))
        level = nxt
    return None, None, checked


def wsha_reachable(
    automaton: HybridAutomaton,
    start: Mapping[str, Rational],
    target: Polyhedron,
    ranks: Optional[RankAssignment] = None,
    prune: bool = True,
    jobs: int = 1,
) -> ReachVerdict:
    """Enumerate run types, solve the per-type LP, emit a replayable run."""
    ranks = ranks or infer_ranks(automaton)
    feasible_final = {
        r: not is_empty(cls.safety.conjoin(target)) for r, cls in ranks.classes.items()
    }
    total_checked = 0
    for start_mode in _start_modes(automaton, ranks, start):
        sigma, sol, checked = _search(
            automaton,
            ranks,
            start,
            start_mode,
            accept=lambda t: type_reach_lp(automaton, ranks, t, start, target),
            final_ok=lambda r: feasible_final[r],
            prune=prune,
            jobs=jobs,
        )
        total_checked += checked
        if sigma is not None:
            run = stitch_reach_run(automaton, ranks, sigma, sol, start_mode)
            replay_run(automaton, run, target=target)
            return ReachVerdict(sigma, run, start_mode, total_checked)
    return ReachVerdict(None, None, None, total_checked)


def wsha_schedulable(
    automaton: HybridAutomaton,
    start: Mapping[str, Rational],
    ranks: Optional[RankAssignment] = None,
    prune: bool = True,
    jobs: int = 1,
    final_class_ok=None,
    cycle_waypoints=None,
) -> SchedVerdict:
    """Type enumeration over the sched LP; lasso = prefix + scaled cycle.

    ``final_class_ok``/``cycle_waypoints`` let the LTL product search reuse
    this loop: the former restricts which classes may host the cycle, the
    latter forces extra zero-dwell visits (e.g. an accepting state).
    """
    ranks = ranks or infer_ranks(automaton)
    total_checked = 0
    for start_mode in _start_modes(automaton, ranks, start):
        sigma, sol, checked = _search(
            automaton,
            ranks,
            start,
            start_mode,
            accept=lambda t: type_sched_lp(automaton, ranks, t, start),
            final_ok=final_class_ok or (lambda r: True),
            prune=prune,
            jobs=jobs,
        )
        total_checked += checked
        if sigma is not None:
            last = len(sigma.ranks) - 1
            cls = ranks.classes[sigma.ranks[last]]
            steps: list[Step] = []
            mode = start_mode
            for i, rank in enumerate(sigma.ranks[:-1]):
                crossing = automaton.transitions[sigma.actions[i]]
                seg = class_run_segment(
                    automaton,
                    ranks.classes[rank],
                    mode,
                    sol.entries[i],
                    DwellSolution(sol.dwells[i], rank),
                    crossing.source,
                )
                steps.extend(seg)
                steps.append(Step(crossing.source, ZERO, crossing.action))
                mode = crossing.target
            waypoints = list(cycle_waypoints(sigma.ranks[last])) if cycle_waypoints else []
            cycle = class_cycle_steps(
                automaton, cls, mode, sol.entries[last], sol.dwells[last], waypoints
            )
            lasso = Lasso(dict(sol.entries[0]), tuple(steps), tuple(cycle))
            replay_lasso(automaton, lasso)
            return SchedVerdict(sigma, lasso, start_mode, total_checked)
    return SchedVerdict(None, None, None, total_checked)
