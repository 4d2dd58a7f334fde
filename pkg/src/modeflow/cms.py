"""Reachability and schedulability for single-class multi-mode systems.

Within one rank class the order of mode switches is irrelevant (guards are
trivial, nothing resets), so reachability reduces to one linear program over
per-mode dwell times - the valuation displacement must bridge start and
target - and schedulability reduces to the existence of a zero-displacement
dwell assignment of unit total time.  Both verdicts are constructive:

* Yes produces a replayable timed run.  The dwell vector is split over N
  rounds of a closed walk through the class; N is chosen from exact row
  slacks so the whole trajectory stays strictly inside the (open) safety
  set, which is the standard scaling argument made executable.
* No for schedulability produces a separating direction v with v.F(m) > 0
  for every mode, extracted from the Farkas certificate of the dwell LP:
  every run must drift along v and eventually leave the bounded safety set.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from .affine import Affine, bind_constraint
from .constraints import LinearConstraint, Polyhedron, Relation, constraint
from .geometry import InternalError, LpProblem, contains_strict, is_empty, lp_feasible
from .model import HybridAutomaton, RankAssignment, RankClass, infer_ranks, is_cms
from .rationals import ONE, ZERO, Rational, rat
from .runs import Lasso, Step, TimedRun, replay_lasso, replay_run

__all__ = [
    "DwellSolution",
    "SchedVerdict",
    "PreconditionViolation",
    "cms_reachable",
    "cms_schedulable",
    "build_reach_witness",
    "build_sched_witness",
]


class PreconditionViolation(ValueError):
    pass


@dataclass(frozen=True)
class DwellSolution:
    """Nonnegative dwell time per mode of one rank class."""

    times: Mapping[str, Rational]
    context: int  # rank of the class the solution lives in

    def total(self) -> Rational:
        return sum(self.times.values(), ZERO)

    def support(self) -> list[str]:
        return sorted(m for m, t in self.times.items() if t != ZERO)


@dataclass(frozen=True)
class SchedVerdict:
    solution: Optional[DwellSolution]
    separating_direction: Optional[dict[str, Rational]] = None

    @property
    def yes(self) -> bool:
        return self.solution is not None


def _require_cms(automaton: HybridAutomaton, ranks: Optional[RankAssignment]) -> RankAssignment:
    ranks = ranks or infer_ranks(automaton)
    if not is_cms(automaton, ranks):
        raise PreconditionViolation("automaton is not a single-class multi-mode system")
    return ranks


def _require_interior(safety: Polyhedron, valuation, what: str) -> None:
    if not contains_strict(safety, valuation):
        raise PreconditionViolation(f"{what} is not strictly inside the safety set")


def cms_reachable(
    automaton: HybridAutomaton,
    start: Mapping[str, Rational],
    target: Polyhedron,
    ranks: Optional[RankAssignment] = None,
) -> Optional[DwellSolution]:
    """Dwell-vector LP: start + sum F(m) t_m must land in target (within S)."""
    ranks = _require_cms(automaton, ranks)
    cls = ranks.classes[0]
    _require_interior(cls.safety, start, "start valuation")
    if is_empty(cls.safety.conjoin(target)):
        raise PreconditionViolation("target does not intersect the safety set")
    mode_names = sorted(cls.modes)
    point = {
        x: Affine.constant(start[x]).plus(
            Affine(
                {f"t_{m}": automaton.modes[m].rate[x] for m in mode_names},
                ZERO,
            )
        )
        for x in automaton.variables
    }
    rows = [bind_constraint(r, point) for r in tuple(target.constraints) + tuple(cls.safety.constraints)]
    rows += [constraint({f"t_{m}": 1}, ">=", 0) for m in mode_names]
    lp = LpProblem.of(tuple(f"t_{m}" for m in mode_names), tuple(rows))
    out = lp_feasible(lp)
    if out.status != "feasible":
        return None
    times = {m: out.witness[f"t_{m}"] for m in mode_names}
    return DwellSolution(times, cls.rank)


def schedulable_class(automaton: HybridAutomaton, cls: RankClass) -> SchedVerdict:
    """Zero-displacement unit-time dwell LP for one class; certified No."""
    mode_names = sorted(cls.modes)
    rows = []
    for x in automaton.variables:
        coeffs = {f"t_{m}": automaton.modes[m].rate[x] for m in mode_names}
        rows.append(constraint(coeffs, "=", 0))
    rows.append(constraint({f"t_{m}": 1 for m in mode_names}, "=", 1))
    rows += [constraint({f"t_{m}": 1}, ">=", 0) for m in mode_names]
    lp = LpProblem.of(tuple(f"t_{m}" for m in mode_names), tuple(rows))
    out = lp_feasible(lp)
    if out.status == "feasible":
        times = {m: out.witness[f"t_{m}"] for m in mode_names}
        return SchedVerdict(DwellSolution(times, cls.rank))
    # Farkas multipliers on the displacement equalities give a direction v
    # with v.F(m) > 0 for all m: every dwell makes progress along v.
    direction = {x: ZERO for x in automaton.variables}
    for idx, mult in (out.farkas or {}).items():
        if idx < len(automaton.variables):
            direction[automaton.variables[idx]] = mult
    for m in mode_names:
        drift = sum(
            (direction[x] * automaton.modes[m].rate[x] for x in automaton.variables), ZERO
        )
        if drift <= ZERO:
            raise InternalError("separating direction fails verification")
    return SchedVerdict(None, separating_direction=direction)


def cms_schedulable(
    automaton: HybridAutomaton,
    start: Mapping[str, Rational],
    ranks: Optional[RankAssignment] = None,
) -> SchedVerdict:
    ranks = _require_cms(automaton, ranks)
    cls = ranks.classes[0]
    _require_interior(cls.safety, start, "start valuation")
    return schedulable_class(automaton, cls)


# ---------------------------------------------------------------------------
# Witness construction (the scaling argument, made concrete)
# ---------------------------------------------------------------------------


def _class_edges(automaton: HybridAutomaton, cls: RankClass):
    adj: dict[str, list[tuple[str, str]]] = {m: [] for m in cls.modes}
    for action in sorted(automaton.transitions):
        t = automaton.transitions[action]
        if t.source in cls.modes and t.target in cls.modes:
            adj[t.source].append((t.target, action))
    return adj


def _path(adj, src: str, dst: str) -> list[tuple[str, str]]:
    """BFS path [(action, mode), ...] from src to dst within the class."""
    if src == dst:
        return []
    seen = {src}
    queue = deque([(src, [])])
    while queue:
        node, acc = queue.popleft()
        for target, action in adj[node]:
            if target in seen:
                continue
            nxt = acc + [(action, target)]
            if target == dst:
                return nxt
            seen.add(target)
            queue.append((target, nxt))
    raise InternalError(f"no intra-class path {src} -> {dst}")


def closed_walk(automaton: HybridAutomaton, cls: RankClass, anchor: str, required) -> list[tuple[str, str]]:
    """Closed walk from anchor covering `required`, greedily BFS-stitched.

    Returns [(action, next_mode), ...]; empty when nothing but the anchor is
    required.  Coverage matters, not optimality: within a class any walk is
    executable because internal guards are trivial.
    """
    adj = _class_edges(automaton, cls)
    walk: list[tuple[str, str]] = []
    here = anchor
    for goal in sorted(set(required) - {anchor}):
        seg = _path(adj, here, goal)
        walk.extend(seg)
        here = goal
    walk.extend(_path(adj, here, anchor))
    return walk


def _round_steps(
    automaton: HybridAutomaton,
    anchor: str,
    walk: Sequence[tuple[str, str]],
    dwell: Mapping[str, Rational],
) -> list[Step]:
    """One round: traverse the walk, spending dwell[m] at m's first visit."""
    remaining = {m: t for m, t in dwell.items() if t != ZERO}
    steps: list[Step] = []
    here = anchor
    for action, nxt in walk:
        steps.append(Step(here, remaining.pop(here, ZERO), action))
        here = nxt
    leftover = remaining.pop(anchor, ZERO)
    if leftover != ZERO or not steps:
        steps.append(Step(anchor, leftover, None))
    if remaining:
        raise InternalError(f"walk missed support modes {sorted(remaining)}")
    return steps


def _row_slack_bound(
    automaton: HybridAutomaton,
    cls: RankClass,
    endpoints: Sequence[Mapping[str, Rational]],
    times: Mapping[str, Rational],
):
    """Per-row (min endpoint slack, max |row . F(m)| * total_time)."""
    total = sum(times.values(), ZERO)
    out = []
    for row in cls.safety.constraints:
        o = row.oriented()
        slack = min(o.slack(v) for v in endpoints)
        dev = ZERO
        for m in cls.modes:
            rate = automaton.modes[m].rate
            dot = sum((c * rate[x] for x, c in o.coeffs.items()), ZERO)
            dev = max(dev, abs(dot))
        out.append((slack, dev * total))
    return out


def _merge_dwell_steps(steps: list[Step]) -> list[Step]:
    out: list[Step] = []
    for s in steps:
        if out and out[-1].action is None and out[-1].mode == s.mode:
            out[-1] = Step(s.mode, out[-1].dwell + s.dwell, s.action)
        else:
            out.append(s)
    return out


def class_run_segment(
    automaton: HybridAutomaton,
    cls: RankClass,
    entry_mode: str,
    entry: Mapping[str, Rational],
    sol: DwellSolution,
    exit_mode: Optional[str] = None,
) -> list[Step]:
    """Steps that realize the dwell vector inside one class.

    Starts at (entry_mode, entry), spends the dwell times over N rounds of a
    covering closed walk so the trajectory never leaves the open safety set,
    and ends at exit_mode (default: wherever the rounds end) having moved by
    exactly sum F(m) * t_m.
    """
    times = dict(sol.times)
    total = sum(times.values(), ZERO)
    exit_val = dict(entry)
    for m, t in times.items():
        if t != ZERO:
            rate = automaton.modes[m].rate
            exit_val = {x: exit_val[x] + rate[x] * t for x in exit_val}
    steps: list[Step] = []
    if total != ZERO:
        support = [m for m, t in times.items() if t != ZERO]
        walk = closed_walk(automaton, cls, entry_mode, support)
        rounds = 1
        for slack, dev in _row_slack_bound(automaton, cls, [entry, exit_val], times):
            if dev == ZERO:
                continue
            if slack <= ZERO:
                raise InternalError("class endpoints are not interior")
            rounds = max(rounds, math.floor(dev / slack) + 1)
        per_round = {m: t / rounds for m, t in times.items()}
        for _ in range(rounds):
            steps.extend(_round_steps(automaton, entry_mode, walk, per_round))
    if exit_mode is not None and exit_mode != entry_mode:
        adj = _class_edges(automaton, cls)
        here = entry_mode
        for action, nxt in _path(adj, entry_mode, exit_mode):
            steps.append(Step(here, ZERO, action))
            here = nxt
    return _merge_dwell_steps(steps)


def build_reach_witness(
    automaton: HybridAutomaton,
    start: Mapping[str, Rational],
    target: Polyhedron,
    sol: DwellSolution,
    ranks: Optional[RankAssignment] = None,
    start_mode: Optional[str] = None,
) -> TimedRun:
    ranks = _require_cms(automaton, ranks)
    cls = ranks.classes[0]
    anchor = start_mode or sorted(set(automaton.initial))[0]
    steps = class_run_segment(automaton, cls, anchor, start, sol)
    end = dict(start)
    for m, t in sol.times.items():
        rate = automaton.modes[m].rate
        end = {x: end[x] + rate[x] * t for x in end}
    run = TimedRun(dict(start), tuple(steps), end)
    replay_run(automaton, run, target=target)
    return run


def class_cycle_steps(
    automaton: HybridAutomaton,
    cls: RankClass,
    anchor_mode: str,
    anchor: Mapping[str, Rational],
    times: Mapping[str, Rational],
    also_visit: Sequence[str] = (),
) -> list[Step]:
    """A zero-displacement cycle at anchor, scaled to stay inside the class.

    ``times`` must sum to one with zero net displacement.  The scale factor
    lambda keeps the cycle inside the open safety set (slack over twice the
    worst drift) and the period elapses lambda > 0, so repeating the cycle
    forever is non-Zeno.  ``also_visit`` forces extra zero-dwell waypoints
    (used to route through accepting states).
    """
    scale = ONE
    for slack, dev in _row_slack_bound(automaton, cls, [anchor], times):
        if dev == ZERO:
            continue
        if slack <= ZERO:
            raise InternalError("cycle anchor is not interior")
        scale = min(scale, slack / (2 * dev))
    scaled = {m: t * scale for m, t in times.items()}
    required = set(m for m, t in scaled.items() if t != ZERO) | set(also_visit) | {anchor_mode}
    walk = closed_walk(automaton, cls, anchor_mode, sorted(required))
    return _merge_dwell_steps(_round_steps(automaton, anchor_mode, walk, scaled))


def build_sched_witness(
    automaton: HybridAutomaton,
    start: Mapping[str, Rational],
    sol: DwellSolution,
    ranks: Optional[RankAssignment] = None,
    start_mode: Optional[str] = None,
) -> Lasso:
    """Lasso with empty prefix: one scaled zero-displacement cycle at start."""
    ranks = _require_cms(automaton, ranks)
    cls = ranks.classes[0]
    anchor = start_mode or sorted(set(automaton.initial))[0]
    cycle = class_cycle_steps(automaton, cls, anchor, start, sol.times)
    lasso = Lasso(dict(start), (), tuple(cycle))
    replay_lasso(automaton, lasso)
    return lasso
