"""Replayable timed runs and lasso witnesses.

Every Yes/CounterExample verdict in the package carries one of these, and
each is replayed with exact arithmetic before being handed out: dwell
endpoints must satisfy mode invariants (convex invariants make endpoint
checks sufficient for whole segments), guards must hold at the post-dwell
valuation, and updates are applied in order.

A lasso replays its cycle twice.  If the cycle returns exactly to its start
it is periodic and valid forever.  Otherwise the second pass must confirm a
constant per-period drift and every constraint value checked along the
cycle must be non-increasing across the two passes (equalities constant),
which proves by affinity that all later periods replay as well - this is
what makes outward-drifting one-variable witnesses checkable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

from .constraints import LinearConstraint, Polyhedron, Relation
from .model import HybridAutomaton, apply_updates
from .rationals import ZERO, Rational

__all__ = ["Step", "TimedRun", "Lasso", "ReplayError", "replay_run", "replay_lasso"]


class ReplayError(AssertionError):
    """A witness failed exact replay; emitted witnesses must never do this."""


@dataclass(frozen=True)
class Step:
    mode: str
    dwell: Rational
    action: Optional[str] = None


@dataclass(frozen=True)
class TimedRun:
    start: Mapping[str, Rational]
    steps: tuple[Step, ...]
    end: Mapping[str, Rational]

    def modes(self) -> list[str]:
        return [s.mode for s in self.steps]

    def total_time(self) -> Rational:
        return sum((s.dwell for s in self.steps), ZERO)


@dataclass(frozen=True)
class Lasso:
    """Finite prefix plus a forever-repeating cycle of positive duration."""

    start: Mapping[str, Rational]
    prefix: tuple[Step, ...]
    cycle: tuple[Step, ...]

    def period_time(self) -> Rational:
        return sum((s.dwell for s in self.cycle), ZERO)


class _RowLog:
    """Collects (oriented relation, value) for every constraint check."""

    def __init__(self):
        self.entries: list[tuple[Relation, Rational, Rational]] = []

    def log(self, row: LinearConstraint, valuation) -> None:
        o = row.oriented()
        lhs = sum((c * valuation[v] for v, c in o.coeffs.items()), ZERO)
        self.entries.append((o.relation, lhs, o.rhs))


def _require(ok: bool, message: str) -> None:
    if not ok:
        raise ReplayError(message)


def _check_poly(poly: Polyhedron, valuation, what: str, log: Optional[_RowLog]) -> None:
    _require(not poly.is_bottom, f"{what} is the empty polyhedron")
    for row in poly.constraints:
        _require(row.evaluate(valuation), f"{what} violated: {row.pretty()}")
        if log is not None:
            log.log(row, valuation)


def _replay_steps(
    automaton: HybridAutomaton,
    valuation: Mapping[str, Rational],
    steps: Sequence[Step],
    log: Optional[_RowLog] = None,
) -> dict[str, Rational]:
    v = dict(valuation)
    for i, step in enumerate(steps):
        mode = automaton.modes.get(step.mode)
        _require(mode is not None, f"step {i}: unknown mode {step.mode!r}")
        _require(step.dwell >= ZERO, f"step {i}: negative dwell")
        _check_poly(mode.invariant, v, f"step {i}: invariant of {step.mode} at entry", log)
        if step.dwell != ZERO:
            v = {x: v[x] + mode.rate[x] * step.dwell for x in v}
        _check_poly(mode.invariant, v, f"step {i}: invariant of {step.mode} after dwell", log)
        if step.action is not None:
            t = automaton.transitions.get(step.action)
            _require(t is not None, f"step {i}: unknown action {step.action!r}")
            _require(t.source == step.mode, f"step {i}: action {step.action} not from {step.mode}")
            _check_poly(t.guard, v, f"step {i}: guard of {step.action}", log)
            v = apply_updates(v, t.updates)
            if i + 1 < len(steps):
                _require(
                    steps[i + 1].mode == t.target,
                    f"step {i}: action {step.action} leads to {t.target}, "
                    f"next step is in {steps[i + 1].mode}",
                )
            else:
                _check_poly(
                    automaton.modes[t.target].invariant,
                    v,
                    f"step {i}: invariant of {t.target} after final action",
                    log,
                )
        elif i + 1 < len(steps):
            _require(
                steps[i + 1].mode == step.mode,
                f"step {i}: no action but mode changes to {steps[i + 1].mode}",
            )
    return v


def replay_run(
    automaton: HybridAutomaton,
    run: TimedRun,
    target: Optional[Polyhedron] = None,
) -> dict[str, Rational]:
    """Replay exactly; raise ReplayError on any violation.

    Returns the terminal valuation, which must equal ``run.end`` and, when a
    target is given, lie inside it.
    """
    if not run.steps:
        _require(dict(run.start) == dict(run.end), "empty run must not move")
    end = _replay_steps(automaton, run.start, run.steps)
    _require(end == dict(run.end), f"terminal valuation {end} != declared end {dict(run.end)}")
    if target is not None:
        _require(target.satisfied_by(end), "terminal valuation misses the target")
    return end


def replay_lasso(automaton: HybridAutomaton, lasso: Lasso) -> dict[str, Rational]:
    """Replay prefix and two cycle periods; validate periodicity or drift.

    Returns the cycle anchor valuation.  Non-Zenoness requires the cycle
    period to elapse strictly positive time.
    """
    _require(len(lasso.cycle) > 0, "lasso needs a non-empty cycle")
    _require(lasso.period_time() > ZERO, "lasso cycle elapses zero time")
    anchor = _replay_steps(automaton, lasso.start, lasso.prefix)
    if lasso.prefix:
        last = lasso.prefix[-1]
        if last.action is not None:
            expected = automaton.transitions[last.action].target
            _require(
                lasso.cycle[0].mode == expected,
                f"prefix hands over to {expected}, cycle starts in {lasso.cycle[0].mode}",
            )
        else:
            _require(
                lasso.cycle[0].mode == last.mode,
                "prefix ends without action but cycle starts in a different mode",
            )
    log1 = _RowLog()
    after1 = _replay_steps(automaton, anchor, lasso.cycle, log1)
    _require(
        lasso.cycle[-1].action is None
        or automaton.transitions[lasso.cycle[-1].action].target == lasso.cycle[0].mode,
        "cycle's final action does not return to the cycle's first mode",
    )
    if lasso.cycle[-1].action is None:
        _require(
            lasso.cycle[0].mode == lasso.cycle[-1].mode,
            "cycle without closing action must stay in one mode",
        )
    if after1 == anchor:
        return anchor
    # Drifting cycle: verify constant displacement and monotone row values.
    log2 = _RowLog()
    after2 = _replay_steps(automaton, after1, lasso.cycle, log2)
    delta1 = {x: after1[x] - anchor[x] for x in anchor}
    delta2 = {x: after2[x] - after1[x] for x in anchor}
    _require(delta1 == delta2, "cycle displacement is not constant across periods")
    _require(len(log1.entries) == len(log2.entries), "cycle checks diverge across periods")
    for (rel1, lhs1, rhs1), (rel2, lhs2, rhs2) in zip(log1.entries, log2.entries):
        _require(rel1 is rel2 and rhs1 == rhs2, "cycle checks diverge across periods")
        if rel1 is Relation.EQ:
            _require(lhs2 == lhs1, "drifting cycle breaks an equality later")
        else:
            _require(lhs2 <= lhs1, "drifting cycle tightens an inequality later")
    return anchor
