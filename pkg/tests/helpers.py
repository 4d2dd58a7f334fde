"""Shared builders for test automata."""

from modeflow.constraints import Polyhedron, constraint
from modeflow.model import HybridAutomaton, Mode, Transition
from modeflow.rationals import rat


def open_box(variables, bounds):
    """bounds: {var: (lo, hi)} -> strict box polyhedron."""
    rows = []
    for v, (lo, hi) in bounds.items():
        rows.append(constraint({v: 1}, ">", lo))
        rows.append(constraint({v: 1}, "<", hi))
    return Polyhedron.of(variables, rows)


def make_cms(rates, bounds, initial=None):
    """Single-class automaton: all modes share one open box, ring-connected.

    rates: {mode: {var: rate}}; bounds: {var: (lo, hi)}.
    """
    variables = tuple(bounds)
    box = open_box(variables, bounds)
    modes = {
        name: Mode(name, {v: rat(r.get(v, 0)) for v in variables}, box)
        for name, r in rates.items()
    }
    names = sorted(modes)
    transitions = {}
    if len(names) > 1:
        for i, name in enumerate(names):
            nxt = names[(i + 1) % len(names)]
            action = f"ring_{name}_{nxt}"
            transitions[action] = Transition(name, action, Polyhedron.top(variables), (), nxt)
    return HybridAutomaton(variables, modes, tuple(initial or names[:1]), transitions)


def chain_wsha(classes, links, initial=None, labels=None):
    """Weak automaton from explicit classes.

    classes: list of (rates, bounds) as for make_cms; class i's modes are
    prefixed "c{i}_".  links: list of (src_class, src_mode, dst_class,
    dst_mode, guard_rows, updates) with unprefixed mode names.
    """
    variables = tuple(classes[0][1])
    modes = {}
    transitions = {}
    for ci, (rates, bounds) in enumerate(classes):
        box = open_box(variables, bounds)
        names = sorted(rates)
        for name in names:
            full = f"c{ci}_{name}"
            modes[full] = Mode(full, {v: rat(rates[name].get(v, 0)) for v in variables}, box)
        if len(names) > 1:
            for i, name in enumerate(names):
                nxt = names[(i + 1) % len(names)]
                action = f"c{ci}_ring_{name}_{nxt}"
                transitions[action] = Transition(
                    f"c{ci}_{name}", action, Polyhedron.top(variables), (), f"c{ci}_{nxt}"
                )
    for li, (sc, sm, dc, dm, guard_rows, updates) in enumerate(links):
        action = f"link{li}_{sc}to{dc}"
        guard = Polyhedron.of(variables, guard_rows)
        transitions[action] = Transition(
            f"c{sc}_{sm}", action, guard, tuple(updates), f"c{dc}_{dm}"
        )
    init = tuple(initial or [sorted(m for m in modes if m.startswith("c0_"))[0]])
    return HybridAutomaton(variables, modes, init, transitions, labels or {})
