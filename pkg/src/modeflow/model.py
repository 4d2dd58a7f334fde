"""Automaton types, the textual model format, and weakness checking.

A hybrid automaton here has finitely many modes, a constant rational rate
vector per mode, polyhedral invariants and guards, and uniquely named
actions, each determining one transition.  Updates on transitions either set
a variable to a constant or add a constant to it; additive updates exist
only so the undecidability gadgets can be expressed, and they are rejected
by the weakness checker.

Rank inference derives the weak layering instead of reading it from the
file: strongly connected components of the mode graph are numbered along a
deterministic topological order, and each component is verified to be a
proper multi-mode class (shared open bounded invariant, trivial internal
guards, no internal updates).
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Mapping, Optional, Sequence

from . import geometry
from .constraints import LinearConstraint, Polyhedron, Relation, check_total
from .rationals import RationalFormatError, Rational, rat, rat_str

__all__ = [
    "UpdateKind",
    "Update",
    "Mode",
    "Transition",
    "HybridAutomaton",
    "RankClass",
    "RankAssignment",
    "Diagnostic",
    "ModelSyntaxError",
    "ModelSemanticError",
    "NotWeakReason",
    "NotWeakError",
    "parse_model",
    "serialize_model",
    "validate_sha",
    "infer_ranks",
    "is_cms",
    "apply_updates",
]


class ModelSyntaxError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.message = message


class ModelSemanticError(ValueError):
    def __init__(self, entity: str, message: str):
        super().__init__(f"{entity}: {message}")
        self.entity = entity
        self.message = message


class UpdateKind(Enum):
    SET = "set"
    ADD = "add"


@dataclass(frozen=True)
class Update:
    variable: str
    kind: UpdateKind
    amount: Rational

    def apply(self, value: Rational) -> Rational:
        return self.amount if self.kind is UpdateKind.SET else value + self.amount


@dataclass(frozen=True)
class Mode:
    name: str
    rate: Mapping[str, Rational]
    invariant: Polyhedron


@dataclass(frozen=True)
class Transition:
    source: str
    action: str
    guard: Polyhedron
    updates: tuple[Update, ...]
    target: str


@dataclass(frozen=True)
class HybridAutomaton:
    variables: tuple[str, ...]
    modes: Mapping[str, Mode]
    initial: tuple[str, ...]
    transitions: Mapping[str, Transition]
    labels: Mapping[str, frozenset[str]] = field(default_factory=dict)

    def mode(self, name: str) -> Mode:
        return self.modes[name]

    def outgoing(self, mode: str) -> list[Transition]:
        return [t for t in self.transitions.values() if t.source == mode]

    def label_of(self, mode: str) -> frozenset[str]:
        return self.labels.get(mode, frozenset())

    def propositions(self) -> frozenset[str]:
        out: set[str] = set()
        for props in self.labels.values():
            out |= props
        return frozenset(out)

    def adjacency(self) -> dict[str, list[str]]:
        adj: dict[str, list[str]] = {m: [] for m in self.modes}
        for t in self.transitions.values():
            adj[t.source].append(t.target)
        return adj


def apply_updates(
    valuation: Mapping[str, Rational], updates: Iterable[Update]
) -> dict[str, Rational]:
    """Apply updates in list order (single pass, later updates see earlier)."""
    out = dict(valuation)
    for u in updates:
        out[u.variable] = u.apply(out[u.variable])
    return out


# ---------------------------------------------------------------------------
# Model file format
# ---------------------------------------------------------------------------

_OPS = {op.value for op in Relation}


def _parse_constraint(raw, variables, entity) -> LinearConstraint:
    if not isinstance(raw, dict) or set(raw) - {"lhs", "op", "rhs"}:
        raise ModelSemanticError(entity, f"malformed constraint object: {raw!r}")
    lhs = raw.get("lhs")
    if not isinstance(lhs, dict):
        raise ModelSemanticError(entity, "constraint lhs must be a map var -> rational")
    coeffs = {}
    for var, coef in lhs.items():
        if var not in variables:
            raise ModelSemanticError(entity, f"unknown variable {var!r} in constraint")
        try:
            coeffs[var] = rat(coef)
        except RationalFormatError as exc:
            raise ModelSemanticError(entity, str(exc)) from exc
    op = raw.get("op")
    if op not in _OPS:
        raise ModelSemanticError(entity, f"unknown relation {op!r}")
    try:
        rhs = rat(raw.get("rhs"))
    except RationalFormatError as exc:
        raise ModelSemanticError(entity, str(exc)) from exc
    return LinearConstraint.make(coeffs, Relation(op), rhs)


def _parse_polyhedron(raw, variables, entity) -> Polyhedron:
    if raw is None:
        return Polyhedron.top(variables)
    if not isinstance(raw, list):
        raise ModelSemanticError(entity, "constraint list expected")
    return Polyhedron.of(variables, (_parse_constraint(r, variables, entity) for r in raw))


def parse_model(text: str) -> HybridAutomaton:
    """Parse the JSON model format; all rationals are exact."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelSyntaxError(exc.lineno, exc.msg) from exc
    if not isinstance(doc, dict):
        raise ModelSyntaxError(1, "top-level object expected")

    variables = doc.get("variables")
    if not isinstance(variables, list) or not all(isinstance(v, str) for v in variables):
        raise ModelSemanticError("variables", "array of names required")
    if len(set(variables)) != len(variables):
        raise ModelSemanticError("variables", "duplicate variable name")
    variables = tuple(variables)

    modes: dict[str, Mode] = {}
    for raw in doc.get("modes", []) or []:
        name = raw.get("name")
        if not isinstance(name, str) or not name:
            raise ModelSemanticError("modes", "mode without a name")
        if name in modes:
            raise ModelSemanticError(name, "duplicate mode")
        rates = raw.get("rate")
        if not isinstance(rates, list) or len(rates) != len(variables):
            raise ModelSemanticError(
                name, f"rate vector must list {len(variables)} entries in variable order"
            )
        try:
            rate = {v: rat(r) for v, r in zip(variables, rates)}
        except RationalFormatError as exc:
            raise ModelSemanticError(name, str(exc)) from exc
        invariant = _parse_polyhedron(raw.get("invariant", []), variables, name)
        modes[name] = Mode(name, rate, invariant)
    if not modes:
        raise ModelSemanticError("modes", "at least one mode required")

    initial = doc.get("initial")
    if not isinstance(initial, list) or not initial:
        raise ModelSemanticError("initial", "non-empty array of mode names required")
    for m in initial:
        if m not in modes:
            raise ModelSemanticError("initial", f"unknown mode {m!r}")

    transitions: dict[str, Transition] = {}
    for raw in doc.get("transitions", []) or []:
        action = raw.get("action")
        if not isinstance(action, str) or not action:
            raise ModelSemanticError("transitions", "transition without an action name")
        if action in transitions:
            raise ModelSemanticError(action, "duplicate action (actions determine transitions)")
        src, dst = raw.get("from"), raw.get("to")
        if src not in modes:
            raise ModelSemanticError(action, f"unknown source mode {src!r}")
        if dst not in modes:
            raise ModelSemanticError(action, f"unknown target mode {dst!r}")
        guard = _parse_polyhedron(raw.get("guard", []), variables, action)
        updates = []
        for up in raw.get("updates", []) or []:
            var = up.get("var")
            if var not in variables:
                raise ModelSemanticError(action, f"update on unknown variable {var!r}")
            kind = up.get("kind")
            if kind not in ("set", "add"):
                raise ModelSemanticError(action, f"unknown update kind {kind!r}")
            try:
                amount = rat(up.get("amount"))
            except RationalFormatError as exc:
                raise ModelSemanticError(action, str(exc)) from exc
            updates.append(Update(var, UpdateKind(kind), amount))
        transitions[action] = Transition(src, action, guard, tuple(updates), dst)

    labels: dict[str, frozenset[str]] = {}
    for mode_name, props in (doc.get("labels") or {}).items():
        if mode_name not in modes:
            raise ModelSemanticError("labels", f"unknown mode {mode_name!r}")
        if not isinstance(props, list) or not all(isinstance(p, str) for p in props):
            raise ModelSemanticError("labels", f"label set of {mode_name!r} must be a name array")
        labels[mode_name] = frozenset(props)

    return HybridAutomaton(variables, modes, tuple(initial), transitions, labels)


def _constraint_to_json(row: LinearConstraint) -> dict:
    return {
        "lhs": {v: rat_str(c) for v, c in sorted(row.coeffs.items())},
        "op": row.relation.value,
        "rhs": rat_str(row.rhs),
    }


def serialize_model(automaton: HybridAutomaton) -> str:
    """Deterministic JSON rendering; parse_model(serialize_model(H)) == H."""
    doc = {
        "variables": list(automaton.variables),
        "modes": [
            {
                "name": m.name,
                "rate": [rat_str(m.rate[v]) for v in automaton.variables],
                "invariant": [_constraint_to_json(r) for r in m.invariant.constraints],
            }
            for m in automaton.modes.values()
        ],
        "initial": list(automaton.initial),
        "transitions": [
            {
                "from": t.source,
                "action": t.action,
                "to": t.target,
                "guard": [_constraint_to_json(r) for r in t.guard.constraints],
                "updates": [
                    {"var": u.variable, "kind": u.kind.value, "amount": rat_str(u.amount)}
                    for u in t.updates
                ],
            }
            for t in automaton.transitions.values()
        ],
        "labels": {m: sorted(props) for m, props in sorted(automaton.labels.items()) if props},
    }
    return json.dumps(doc, indent=2) + "\n"


# ---------------------------------------------------------------------------
# Structural validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "warning" | "error"
    entity: str
    message: str


def validate_sha(automaton: HybridAutomaton) -> list[Diagnostic]:
    """Structural diagnostics; weakness-specific errors surface in infer_ranks."""
    out: list[Diagnostic] = []
    for mode in automaton.modes.values():
        if geometry.is_empty(mode.invariant):
            severity = "error" if mode.name in automaton.initial else "warning"
            out.append(Diagnostic(severity, mode.name, "empty invariant"))
        elif not geometry.is_bounded(mode.invariant):
            out.append(Diagnostic("warning", mode.name, "unbounded invariant"))
    return out


# ---------------------------------------------------------------------------
# Rank inference / weakness
# ---------------------------------------------------------------------------


class NotWeakReason(Enum):
    INTRA_CLASS_GUARD = "IntraClassGuard"
    INTRA_CLASS_UPDATE = "IntraClassUpdate"
    UNBOUNDED_OR_CLOSED_INVARIANT = "UnboundedOrClosedInvariant"
    INVARIANT_MISMATCH_WITHIN_CLASS = "InvariantMismatchWithinClass"
    ADD_UPDATE = "AddUpdate"


class NotWeakError(ValueError):
    def __init__(self, reason: NotWeakReason, entity: str, message: str):
        super().__init__(f"{reason.value} at {entity}: {message}")
        self.reason = reason
        self.entity = entity
        self.message = message


@dataclass(frozen=True)
class RankClass:
    rank: int
    modes: frozenset[str]
    safety: Polyhedron


@dataclass(frozen=True)
class RankAssignment:
    rank: Mapping[str, int]
    classes: Mapping[int, RankClass]

    def class_of(self, mode: str) -> RankClass:
        return self.classes[self.rank[mode]]

    @property
    def count(self) -> int:
        return len(self.classes)


def _tarjan_sccs(order: Sequence[str], adj: Mapping[str, list[str]]) -> list[list[str]]:
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    sccs: list[list[str]] = []
    counter = 0

    for root in order:
        if root in index:
            continue
        work = [(root, iter(adj[root]))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for nxt in it:
                if nxt not in index:
                    index[nxt] = low[nxt] = counter
                    counter += 1
                    stack.append(nxt)
                    on_stack.add(nxt)
                    work.append((nxt, iter(adj[nxt])))
                    advanced = True
                    break
                if nxt in on_stack:
                    low[node] = min(low[node], index[nxt])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == node:
                        break
                sccs.append(comp)
    return sccs


def infer_ranks(automaton: HybridAutomaton) -> RankAssignment:
    """Derive ranks from SCC condensation and verify the class conditions.

    Ranks follow a topological order of the condensation; ties break by the
    lexicographically smallest mode name in the component, so identical
    inputs always yield identical numbering.
    """
    order = sorted(automaton.modes)
    raw_adj = automaton.adjacency()
    adj = {m: sorted(set(raw_adj[m])) for m in automaton.modes}
    sccs = _tarjan_sccs(order, adj)
    comp_of: dict[str, int] = {}
    for ci, comp in enumerate(sccs):
        for m in comp:
            comp_of[m] = ci

    # Kahn topological numbering over components, deterministic tie-break.
    nxt: dict[int, set[int]] = {i: set() for i in range(len(sccs))}
    indeg = {i: 0 for i in range(len(sccs))}
    for t in automaton.transitions.values():
        a, b = comp_of[t.source], comp_of[t.target]
        if a != b and b not in nxt[a]:
            nxt[a].add(b)
            indeg[b] += 1
    keyed = {i: min(sccs[i]) for i in range(len(sccs))}
    heap = [(keyed[i], i) for i in range(len(sccs)) if indeg[i] == 0]
    heapq.heapify(heap)
    rank_of_comp: dict[int, int] = {}
    next_rank = 0
    while heap:
        _, i = heapq.heappop(heap)
        rank_of_comp[i] = next_rank
        next_rank += 1
        for j in sorted(nxt[i]):
            indeg[j] -= 1
            if indeg[j] == 0:
                heapq.heappush(heap, (keyed[j], j))
    if len(rank_of_comp) != len(sccs):  # pragma: no cover - condensation is a DAG
        raise AssertionError("condensation not acyclic")

    rank = {m: rank_of_comp[comp_of[m]] for m in automaton.modes}
    classes: dict[int, RankClass] = {}
    for ci, comp in enumerate(sccs):
        members = sorted(comp)
        base = automaton.modes[members[0]].invariant
        base_key = base.canonical_key()
        for m in members[1:]:
            if automaton.modes[m].invariant.canonical_key() != base_key:
                raise NotWeakError(
                    NotWeakReason.INVARIANT_MISMATCH_WITHIN_CLASS,
                    m,
                    f"invariant differs from {members[0]} within one class "
                    "(invariants are compared syntactically after normalization)",
                )
        r = rank_of_comp[ci]
        classes[r] = RankClass(r, frozenset(members), base)

    for action in sorted(automaton.transitions):
        t = automaton.transitions[action]
        if rank[t.source] > rank[t.target]:  # pragma: no cover - impossible by construction
            raise AssertionError("rank decreased along a transition")
        if rank[t.source] == rank[t.target]:
            if not t.guard.is_top:
                raise NotWeakError(
                    NotWeakReason.INTRA_CLASS_GUARD,
                    action,
                    "transition inside a rank class must have a trivial guard",
                )
            if t.updates:
                raise NotWeakError(
                    NotWeakReason.INTRA_CLASS_UPDATE,
                    action,
                    "transition inside a rank class must not update variables",
                )

    verdict_cache: dict[tuple, bool] = {}
    for r in sorted(classes):
        cls = classes[r]
        key = cls.safety.canonical_key()
        ok = verdict_cache.get(key)
        if ok is None:
            ok = geometry.is_bounded(cls.safety) and geometry.is_open(cls.safety)
            verdict_cache[key] = ok
        if not ok:
            raise NotWeakError(
                NotWeakReason.UNBOUNDED_OR_CLOSED_INVARIANT,
                min(cls.modes),
                "class safety set must be an open bounded polytope",
            )

    for action in sorted(automaton.transitions):
        for up in automaton.transitions[action].updates:
            if up.kind is UpdateKind.ADD:
                raise NotWeakError(
                    NotWeakReason.ADD_UPDATE,
                    action,
                    "additive updates are outside the weak fragment",
                )

    return RankAssignment(rank, classes)


def is_cms(automaton: HybridAutomaton, ranks: RankAssignment) -> bool:
    """True iff the whole automaton is a single rank class."""
    return ranks.count == 1
