"""Instance generators and a two-counter machine simulator.

The generators produce:

* subset-sum reachability instances (weak, acyclic, one mode class per mode),
* counter-machine encodings as three-variable automata with additive updates,
* counter-machine encodings as clock-gadget automata (three plain variables
  plus one clock that resets on almost every edge),
* the two-dimensional motion-planning example used throughout the docs and
  tests.

The counter encodings store counter value c as ``5 - 1/2**c`` in a dedicated
variable; the widgets force exact dwell times through invariants (additive
variant) or clock guards (clock variant), so a breadth-first symbolic search
tracks exact machine configurations.  The simulator is the independent
oracle the encodings are tested against.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from .constraints import LinearConstraint, Polyhedron, Relation, constraint
from .model import HybridAutomaton, Mode, Transition, Update, UpdateKind
from .rationals import ONE, ZERO, Rational, rat

__all__ = [
    "CounterMachine",
    "Instruction",
    "SubsetSumInstance",
    "CounterProgramError",
    "StuckDecrementOnZero",
    "Halted",
    "Running",
    "parse_counter_program",
    "run_counter_machine",
    "gen_subset_sum",
    "gen_counter_machine_sha",
    "gen_counter_machine_cms_clock",
    "gen_robot_example",
    "COUNTER_SHA_START",
    "COUNTER_CMS_START",
]


# ---------------------------------------------------------------------------
# Two-counter machines
# ---------------------------------------------------------------------------


class CounterProgramError(ValueError):
    pass


class StuckDecrementOnZero(RuntimeError):
    """Decrement of a zero counter; programs must guard decrements."""


@dataclass(frozen=True)
class Instruction:
    op: str  # "inc" | "dec" | "ifz" | "halt"
    counter: Optional[str] = None  # "c1" | "c2"
    target: Optional[int] = None  # inc/dec goto, ifz then-branch
    orelse: Optional[int] = None  # ifz else-branch


@dataclass(frozen=True)
class CounterMachine:
    instructions: tuple[Instruction, ...]

    def __post_init__(self):
        if not self.instructions:
            raise CounterProgramError("empty program")
        if self.instructions[-1].op != "halt":
            raise CounterProgramError("last instruction must be halt")
        n = len(self.instructions)
        for i, ins in enumerate(self.instructions):
            for tgt in (ins.target, ins.orelse):
                if tgt is not None and not 0 <= tgt < n:
                    raise CounterProgramError(f"l{i}: branch target l{tgt} does not exist")


_LINE = re.compile(
    r"^l(?P<idx>\d+):\s*(?:"
    r"(?P<op>inc|dec)\s+(?P<ctr>c[12])\s+goto\s+l(?P<tgt>\d+)"
    r"|ifz\s+(?P<zctr>c[12])\s+goto\s+l(?P<then>\d+)\s+else\s+l(?P<els>\d+)"
    r"|(?P<halt>halt)"
    r")\s*$"
)


def parse_counter_program(text: str) -> CounterMachine:
    """One instruction per line: ``lN: inc c1 goto lM`` etc."""
    parsed: dict[int, Instruction] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _LINE.match(line)
        if not m:
            raise CounterProgramError(f"line {lineno}: cannot parse {raw!r}")
        idx = int(m.group("idx"))
        if idx in parsed:
            raise CounterProgramError(f"line {lineno}: duplicate label l{idx}")
        if m.group("halt"):
            parsed[idx] = Instruction("halt")
        elif m.group("op"):
            parsed[idx] = Instruction(m.group("op"), m.group("ctr"), int(m.group("tgt")))
        else:
            parsed[idx] = Instruction(
                "ifz", m.group("zctr"), int(m.group("then")), int(m.group("els"))
            )
    if sorted(parsed) != list(range(len(parsed))):
        raise CounterProgramError("labels must be exactly l0..lN")
    return CounterMachine(tuple(parsed[i] for i in range(len(parsed))))


@dataclass(frozen=True)
class Halted:
    c1: int
    c2: int
    steps: int


@dataclass(frozen=True)
class Running:
    steps: int


def run_counter_machine(machine: CounterMachine, max_steps: int):
    """Deterministic simulation from (l0, 0, 0)."""
    pc, counters = 0, {"c1": 0, "c2": 0}
    steps = 0
    while steps < max_steps:
        ins = machine.instructions[pc]
        steps += 1
        if ins.op == "halt":
            return Halted(counters["c1"], counters["c2"], steps)
        if ins.op == "inc":
            counters[ins.counter] += 1
            pc = ins.target
        elif ins.op == "dec":
            if counters[ins.counter] == 0:
                raise StuckDecrementOnZero(f"l{pc}: decrement of zero {ins.counter}")
            counters[ins.counter] -= 1
            pc = ins.target
        else:  # ifz
            pc = ins.target if counters[ins.counter] == 0 else ins.orelse
    return Running(steps)


def machine_trace(machine: CounterMachine, max_steps: int):
    """(pc, c1, c2) configurations before each executed instruction."""
    pc, c1, c2 = 0, 0, 0
    out = [(0, 0, 0)]
    for _ in range(max_steps):
        ins = machine.instructions[pc]
        if ins.op == "halt":
            return out
        if ins.op == "inc":
            c1, c2 = (c1 + 1, c2) if ins.counter == "c1" else (c1, c2 + 1)
            pc = ins.target
        elif ins.op == "dec":
            if (ins.counter == "c1" and c1 == 0) or (ins.counter == "c2" and c2 == 0):
                raise StuckDecrementOnZero(f"l{pc}")
            c1, c2 = (c1 - 1, c2) if ins.counter == "c1" else (c1, c2 - 1)
            pc = ins.target
        else:
            pc = ins.target if (c1 if ins.counter == "c1" else c2) == 0 else ins.orelse
        out.append((pc, c1, c2))
    return out


# ---------------------------------------------------------------------------
# Subset-sum reachability instances
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SubsetSumInstance:
    values: tuple[int, ...]
    k: int

    def __post_init__(self):
        if not self.values:
            raise ValueError("subset-sum needs a non-empty value set")
        if any(a == 0 for a in self.values):
            raise ValueError("zero elements are not supported by the encoding")


def gen_subset_sum(inst: SubsetSumInstance):
    """Encode subset-sum as reachability in an acyclic weak automaton.

    Variables: x0 (forces unit time in the first mode), x1..xn (element
    budgets), x{n+1} (accumulated sum), x{n+2} (chosen-element counter).
    Mode m0 initializes; afterwards level j picks m_{2j-1} (take element j)
    or m_{2j} (skip it), each for exactly one time unit.  Returns
    (automaton, start valuation, target polyhedron).
    """
    values = inst.values
    n = len(values)
    variables = tuple(f"x{i}" for i in range(n + 3))
    bound = rat(1 + sum(abs(a) for a in values) + abs(inst.k) + n)
    box_rows = []
    for v in variables:
        box_rows.append(constraint({v: 1}, "<", bound))
        box_rows.append(constraint({v: 1}, ">", -bound))
    box = Polyhedron.of(variables, box_rows)

    def mk_mode(name: str, rates: Mapping[str, int]) -> Mode:
        rate = {v: rat(rates.get(v, 0)) for v in variables}
        return Mode(name, rate, box)

    modes: dict[str, Mode] = {}
    modes["m0"] = mk_mode("m0", {"x0": 1, **{f"x{i}": values[i - 1] for i in range(1, n + 1)}})
    for j in range(1, n + 1):
        take = {f"x{j}": -values[j - 1], f"x{n + 1}": values[j - 1], f"x{n + 2}": 1}
        skip = {f"x{j}": -values[j - 1]}
        modes[f"m{2 * j - 1}"] = mk_mode(f"m{2 * j - 1}", take)
        modes[f"m{2 * j}"] = mk_mode(f"m{2 * j}", skip)

    transitions: dict[str, Transition] = {}

    def edge(src: str, dst: str) -> None:
        action = f"{src}_to_{dst}"
        transitions[action] = Transition(src, action, Polyhedron.top(variables), (), dst)

    edge("m0", "m1")
    edge("m0", "m2")
    for j in range(1, n):
        for src in (f"m{2 * j - 1}", f"m{2 * j}"):
            edge(src, f"m{2 * j + 1}")
            edge(src, f"m{2 * j + 2}")

    target_rows = [constraint({"x0": 1}, "=", 1)]
    target_rows += [constraint({f"x{i}": 1}, "=", 0) for i in range(1, n + 1)]
    target_rows.append(constraint({f"x{n + 1}": 1}, "=", inst.k))
    target_rows.append(constraint({f"x{n + 2}": 1}, ">=", 1))
    target_rows.append(constraint({f"x{n + 2}": 1}, "<=", n))
    target = Polyhedron.of(variables, target_rows)

    automaton = HybridAutomaton(variables, modes, ("m0",), transitions)
    start = {v: ZERO for v in variables}
    return automaton, start, target


# ---------------------------------------------------------------------------
# Counter machine -> automaton with additive updates
# ---------------------------------------------------------------------------

COUNTER_SHA_START = {"x": ZERO, "y": rat(4), "z": rat(4)}

_SHA_VARS = ("x", "y", "z")


def _sha_box() -> Polyhedron:
    rows = [
        constraint({"x": 1}, ">=", 0),
        constraint({"x": 1}, "<=", 1),
        constraint({"y": 1}, ">=", 0),
        constraint({"y": 1}, "<=", 5),
        constraint({"z": 1}, ">=", 0),
        constraint({"z": 1}, "<=", 5),
    ]
    return Polyhedron.of(_SHA_VARS, rows)


def gen_counter_machine_sha(machine: CounterMachine) -> HybridAutomaton:
    """Additive-update encoding: counters live in y and z as 5 - 1/2**c.

    Increment/decrement widgets drain the counter variable to zero twice
    (invariants force the exact dwell times), halving or doubling the stored
    distance to 5; zero checks exploit that only c=0 tolerates the +1 probe.
    """
    box = _sha_box()
    modes: dict[str, Mode] = {}
    transitions: dict[str, Transition] = {}

    def entry_name(i: int) -> str:
        return "HALT" if machine.instructions[i].op == "halt" else f"l{i}"

    def add_mode(name: str, rx, ry, rz) -> str:
        modes[name] = Mode(name, {"x": rat(rx), "y": rat(ry), "z": rat(rz)}, box)
        return name

    def add_edge(tag: str, src: str, dst: str, updates) -> None:
        ups = tuple(Update(v, UpdateKind.ADD, rat(a)) for v, a in updates)
        transitions[tag] = Transition(src, tag, Polyhedron.top(_SHA_VARS), ups, dst)

    for i, ins in enumerate(machine.instructions):
        if ins.op == "halt":
            add_mode("HALT", 0, 0, 0)
            continue
        entry = entry_name(i)
        if ins.op in ("inc", "dec"):
            ctr = ins.counter
            var = "y" if ctr == "c1" else "z"
            last_rate = -3 if ins.op == "inc" else -12
            if ctr == "c1":
                add_mode(entry, 1, -6, 0)
                add_mode(f"{entry}_A", 1, -30, 0)
                add_mode(f"{entry}_B", 1, last_rate, 0)
            else:
                add_mode(entry, 1, 0, -6)
                add_mode(f"{entry}_A", 1, 0, -30)
                add_mode(f"{entry}_B", 1, 0, last_rate)
            add_edge(f"{entry}_s1", entry, f"{entry}_A", [(var, 5)])
            add_edge(f"{entry}_s2", f"{entry}_A", f"{entry}_B", [(var, 5)])
            add_edge(f"{entry}_s3", f"{entry}_B", entry_name(ins.target), [("x", -1)])
        else:  # ifz
            var = "y" if ins.counter == "c1" else "z"
            if ins.counter == "c1":
                add_mode(entry, 2, 1, 0)
                add_mode(f"{entry}_A", -1, -1, 0)
                add_mode(f"{entry}_B", 1, rat(1, 2), 0)
                add_mode(f"{entry}_C", 2, 1, 0)
                add_mode(f"{entry}_D", 0, 0, 0)
            else:
                add_mode(entry, 2, 0, 1)
                add_mode(f"{entry}_A", -1, 0, -1)
                add_mode(f"{entry}_B", 1, 0, rat(1, 2))
                add_mode(f"{entry}_C", 2, 0, 1)
                add_mode(f"{entry}_D", 0, 0, 0)
            add_edge(f"{entry}_z1", entry, f"{entry}_A", [(var, 1)])
            add_edge(f"{entry}_z2", f"{entry}_A", entry_name(ins.target), [(var, -1)])
            add_edge(f"{entry}_z3", entry, f"{entry}_B", [(var, -5)])
            add_edge(f"{entry}_z4", f"{entry}_B", f"{entry}_C", [("x", -1)])
            add_edge(f"{entry}_z5", f"{entry}_C", f"{entry}_D", [("x", -1)])
            add_edge(f"{entry}_z6", f"{entry}_D", entry_name(ins.orelse), [(var, 4)])

    labels = {"HALT": frozenset({"halt"})}
    return HybridAutomaton(_SHA_VARS, modes, (entry_name(0),), transitions, labels)


# ---------------------------------------------------------------------------
# Counter machine -> clock-gadget automaton
# ---------------------------------------------------------------------------

COUNTER_CMS_START = {"x1": rat(4), "x2": rat(4), "y": ONE, "x": ZERO}

_CMS_VARS = ("x1", "x2", "y", "x")


def _cms_box() -> Polyhedron:
    rows = [
        constraint({"x1": 1}, ">=", 0),
        constraint({"x1": 1}, "<=", 5),
        constraint({"x2": 1}, ">=", 0),
        constraint({"x2": 1}, "<=", 5),
        constraint({"y": 1}, ">=", 0),
        constraint({"y": 1}, "<=", 1),
    ]
    return Polyhedron.of(_CMS_VARS, rows)


def gen_counter_machine_cms_clock(machine: CounterMachine) -> HybridAutomaton:
    """Clock-gadget encoding: counters in x1/x2 as 5 - 1/2**c, clock x.

    The clock ticks at rate one in every mode and is reset on (almost) every
    edge; guards ``x = 1`` force unit dwells, the two strict-window guards
    leave exactly the freedom the counter encoding needs.
    """
    box = _cms_box()
    modes: dict[str, Mode] = {}
    transitions: dict[str, Transition] = {}
    reset = (Update("x", UpdateKind.SET, ZERO),)

    def entry_name(i: int) -> str:
        return "HALT" if machine.instructions[i].op == "halt" else f"l{i}"

    def add_mode(name: str, r1, r2, ry) -> str:
        rate = {"x1": rat(r1), "x2": rat(r2), "y": rat(ry), "x": ONE}
        modes[name] = Mode(name, rate, box)
        return name

    def guard(rows) -> Polyhedron:
        return Polyhedron.of(_CMS_VARS, rows)

    def add_edge(tag, src, dst, g, do_reset=True) -> None:
        transitions[tag] = Transition(src, tag, g, reset if do_reset else (), dst)

    g_eq1 = guard([constraint({"x": 1}, "=", 1)])
    g_eq0 = guard([constraint({"x": 1}, "=", 0)])
    g_lt1 = guard([constraint({"x": 1}, "<", 1)])
    g_win = guard([constraint({"x": 1}, ">", 0), constraint({"x": 1}, "<", 1)])

    for i, ins in enumerate(machine.instructions):
        if ins.op == "halt":
            add_mode("HALT", 0, 0, 0)
            continue
        entry = entry_name(i)
        if ins.op in ("inc", "dec"):
            c1 = ins.counter == "c1"
            mid_rate = -3 if ins.op == "inc" else -12

            def r(active, other=0):
                return (active, other) if c1 else (other, active)

            add_mode(entry, *r(6), -1)
            add_mode(f"{entry}_A", *r(-5), 0)
            add_mode(f"{entry}_B", *r(5), 0)
            add_mode(f"{entry}_C", *r(mid_rate), 1)
            add_mode(f"{entry}_D", *r(0), -1)
            add_mode(f"{entry}_E", *r(0), 1)
            add_edge(f"{entry}_s1", entry, f"{entry}_A", g_win)
            add_edge(f"{entry}_s2", f"{entry}_A", f"{entry}_B", g_eq1)
            add_edge(f"{entry}_s3", f"{entry}_B", f"{entry}_C", g_eq1)
            add_edge(f"{entry}_s4", f"{entry}_C", f"{entry}_D", Polyhedron.top(_CMS_VARS))
            add_edge(f"{entry}_s5", f"{entry}_D", f"{entry}_E", g_eq1)
            add_edge(f"{entry}_s6", f"{entry}_E", entry_name(ins.target), g_eq1)
        else:  # ifz
            c1 = ins.counter == "c1"

            def r(active, other=0):
                return (active, other) if c1 else (other, active)

            add_mode(entry, *r(1), 0)
            add_mode(f"{entry}_A", *r(-1), 0)
            add_mode(f"{entry}_B", *r(1), -1)
            add_mode(f"{entry}_C", *r(-5), 0)
            add_mode(f"{entry}_D", *r(5), 0)
            add_mode(f"{entry}_E", *r(-1), 1)
            add_mode(f"{entry}_F", *r(0), -1)
            add_mode(f"{entry}_G", *r(0), 1)
            add_edge(f"{entry}_z1", entry, f"{entry}_A", g_eq1)
            add_edge(f"{entry}_z2", f"{entry}_A", entry_name(ins.target), g_eq1)
            add_edge(f"{entry}_z3", entry, f"{entry}_B", g_eq0, do_reset=False)
            add_edge(f"{entry}_z4", f"{entry}_B", f"{entry}_C", g_lt1)
            add_edge(f"{entry}_z5", f"{entry}_C", f"{entry}_D", g_eq1)
            add_edge(f"{entry}_z6", f"{entry}_D", f"{entry}_E", g_eq1)
            add_edge(f"{entry}_z7", f"{entry}_E", f"{entry}_F", g_lt1)
            add_edge(f"{entry}_z8", f"{entry}_F", f"{entry}_G", g_eq1)
            add_edge(f"{entry}_z9", f"{entry}_G", entry_name(ins.orelse), g_eq1)

    labels = {"HALT": frozenset({"halt"})}
    return HybridAutomaton(_CMS_VARS, modes, (entry_name(0),), transitions, labels)


# ---------------------------------------------------------------------------
# Motion-planning example
# ---------------------------------------------------------------------------


def gen_robot_example():
    """Four-region motion planning instance: (automaton, start, target).

    Regions chain o1 -> o2 -> o3 -> o4 through strict window guards; o1 and
    o4 contain several motion primitives each, o2/o3 one.  The start sits in
    o1, the target box sits well inside o4.
    """
    variables = ("x", "y")

    def box(x_lo, x_hi, y_lo, y_hi) -> Polyhedron:
        return Polyhedron.of(
            variables,
            [
                constraint({"x": 1}, ">", x_lo),
                constraint({"x": 1}, "<", x_hi),
                constraint({"y": 1}, ">", y_lo),
                constraint({"y": 1}, "<", y_hi),
            ],
        )

    o1 = box(0, 6, 0, 1)
    o2 = box(2, 3, -3, 3)
    o3 = box(1, 7, -2, -1)
    o4 = box(5, 7, -3, -1)

    rates = {
        "m1": ("1", "1/2"),
        "m2": ("1", "-1/2"),
        "m3": ("0", "-1"),
        "m4": ("1", "0"),
        "m5": ("1/2", "-1/2"),
        "m6": ("-1/2", "-1/2"),
        "m7": ("0", "1"),
    }
    invariants = {"m1": o1, "m2": o1, "m3": o2, "m4": o3, "m5": o4, "m6": o4, "m7": o4}
    modes = {
        name: Mode(name, {"x": rat(rx), "y": rat(ry)}, invariants[name])
        for name, (rx, ry) in rates.items()
    }

    top = Polyhedron.top(variables)
    guard_12 = Polyhedron.of(
        variables, [constraint({"x": 1}, ">", 2), constraint({"x": 1}, "<", 3)]
    )
    guard_23 = Polyhedron.of(
        variables, [constraint({"y": 1}, ">", -2), constraint({"y": 1}, "<", -1)]
    )
    guard_34 = Polyhedron.of(
        variables, [constraint({"x": 1}, ">", 5), constraint({"x": 1}, "<", 7)]
    )
    edges = [
        ("a12", "m1", "m2", top),
        ("a21", "m2", "m1", top),
        ("a13", "m1", "m3", guard_12),
        ("a34", "m3", "m4", guard_23),
        ("a45", "m4", "m5", guard_34),
        ("a56", "m5", "m6", top),
        ("a67", "m6", "m7", top),
        ("a75", "m7", "m5", top),
    ]
    transitions = {
        action: Transition(src, action, g, (), dst) for action, src, dst, g in edges
    }
    labels = {
        "m1": frozenset({"o1"}),
        "m2": frozenset({"o1"}),
        "m3": frozenset({"o2"}),
        "m4": frozenset({"o3"}),
        "m5": frozenset({"o4"}),
        "m6": frozenset({"o4"}),
        "m7": frozenset({"o4"}),
    }
    automaton = HybridAutomaton(variables, modes, ("m1",), transitions, labels)
    start = {"x": rat(1, 2), "y": rat(1, 2)}
    target = Polyhedron.of(
        variables,
        [
            constraint({"x": 1}, ">=", rat(26, 5)),
            constraint({"x": 1}, "<=", rat(28, 5)),
            constraint({"y": 1}, ">=", rat(-19, 10)),
            constraint({"y": 1}, "<=", rat(-17, 10)),
        ],
    )
    return automaton, start, target
