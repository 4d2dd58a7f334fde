"""Run-type enumeration, per-type LPs and the weak decision procedures."""

import itertools
import random

import pytest

from helpers import chain_wsha, make_cms, open_box
from modeflow.cms import PreconditionViolation
from modeflow.constraints import Polyhedron, constraint
from modeflow.gen import SubsetSumInstance, gen_robot_example, gen_subset_sum
from modeflow.model import infer_ranks
from modeflow.rationals import ZERO, rat
from modeflow.runs import replay_lasso, replay_run
from modeflow.wsha import (
    MalformedType,
    RunType,
    enumerate_run_types,
    type_reach_lp,
    type_sched_lp,
    wsha_reachable,
    wsha_schedulable,
)


def brute_force_subset_sum(values, k):
    for r in range(1, len(values) + 1):
        for combo in itertools.combinations(values, r):
            if sum(combo) == k:
                return True
    return False


class TestEnumerateRunTypes:
    def test_single_class_single_type(self):
        h = make_cms({"a": {"x": 1}, "b": {"x": -1}}, {"x": (0, 1)})
        ranks = infer_ranks(h)
        types = list(enumerate_run_types(h, ranks, "a"))
        assert types == [RunType((0,), ())]

    def test_robot_chain_types(self):
        h, _, _ = gen_robot_example()
        ranks = infer_ranks(h)
        types = list(enumerate_run_types(h, ranks, "m1"))
        assert RunType((0,), ()) in types
        assert RunType((0, 1), ("a13",)) in types
        assert RunType((0, 1, 2), ("a13", "a34")) in types
        assert RunType((0, 1, 2, 3), ("a13", "a34", "a45")) in types
        assert len(types) == 4

    def test_diamond_counts_and_uniqueness(self):
        # Classes 0 -> {1, 2} -> 3 with two actions per class edge.
        classes = [
            ({"a": {"x": 1}}, {"x": (-9, 9)}),
            ({"b": {"x": -1}}, {"x": (-9, 9)}),
            ({"c": {"x": 1}}, {"x": (-9, 9)}),
            ({"d": {"x": 0}}, {"x": (-9, 9)}),
        ]
        links = []
        for dup in range(2):
            links.append((0, "a", 1, "b", [], []))
            links.append((0, "a", 2, "c", [], []))
            links.append((1, "b", 3, "d", [], []))
            links.append((2, "c", 3, "d", [], []))
        h = chain_wsha(classes, links)
        ranks = infer_ranks(h)
        types = list(enumerate_run_types(h, ranks, "c0_a"))
        assert len(types) == len(set(types)) == 1 + 4 + 8
        lengths = [len(t.ranks) for t in types]
        assert lengths == sorted(lengths)

    def test_emission_order_lexicographic_within_length(self):
        h, _, _ = gen_robot_example()
        ranks = infer_ranks(h)
        types = list(enumerate_run_types(h, ranks, "m1"))
        by_len = {}
        for t in types:
            by_len.setdefault(len(t.ranks), []).append(t.actions)
        for group in by_len.values():
            assert group == sorted(group)


class TestTypeLps:
    def test_start_in_target_zero_dwell(self):
        h = make_cms({"a": {"x": 1}, "b": {"x": -1}}, {"x": (0, 1)})
        ranks = infer_ranks(h)
        target = Polyhedron.of(("x",), [constraint({"x": 1}, "=", rat(1, 2))])
        sol = type_reach_lp(h, ranks, RunType((0,), ()), {"x": rat(1, 2)}, target)
        assert sol is not None
        assert all(t == ZERO for t in sol.dwells[0].values())

    def test_malformed_action_rejected(self):
        h, _, _ = gen_robot_example()
        ranks = infer_ranks(h)
        with pytest.raises(MalformedType):
            type_reach_lp(
                h,
                ranks,
                RunType((0, 2), ("a13",)),
                {"x": rat(1), "y": rat(1, 2)},
                Polyhedron.top(("x", "y")),
            )

    def test_skipping_class_infeasible_when_route_forced(self):
        # Bridge 0->2 guarded by x = 20, unreachable inside the boxes; the
        # chain through class 1 is the only live route.
        classes = [
            ({"a": {"x": 1}}, {"x": (0, 4)}),
            ({"b": {"x": 1}}, {"x": (0, 6)}),
            ({"c": {"x": 1}}, {"x": (0, 10)}),
        ]
        links = [
            (0, "a", 1, "b", [constraint({"x": 1}, "=", 2)], []),
            (1, "b", 2, "c", [constraint({"x": 1}, "=", 3)], []),
            (0, "a", 2, "c", [constraint({"x": 1}, "=", 20)], []),
        ]
        h = chain_wsha(classes, links)
        ranks = infer_ranks(h)
        target = Polyhedron.of(("x",), [constraint({"x": 1}, "=", 7)])
        start = {"x": rat(1)}
        skip = RunType((0, 2), ("link2_0to2",))
        chain = RunType((0, 1, 2), ("link0_0to1", "link1_1to2"))
        assert type_reach_lp(h, ranks, skip, start, target) is None
        assert type_reach_lp(h, ranks, chain, start, target) is not None
        # Brute force over all enumerated types: only the full chain works.
        feasible = [
            t
            for t in enumerate_run_types(h, ranks, "c0_a")
            if type_reach_lp(h, ranks, t, start, target) is not None
        ]
        assert feasible == [chain]

    def test_sched_lp_balanced_class(self):
        h = make_cms({"a": {"x": 1}, "b": {"x": -1}}, {"x": (0, 1)})
        ranks = infer_ranks(h)
        assert type_sched_lp(h, ranks, RunType((0,), ()), {"x": rat(1, 2)}) is not None

    def test_sched_lp_drifting_class(self):
        h = make_cms({"a": {"x": 1}}, {"x": (0, 1)})
        ranks = infer_ranks(h)
        assert type_sched_lp(h, ranks, RunType((0,), ()), {"x": rat(1, 2)}) is None

    def test_sched_only_top_class_balances(self):
        classes = [
            ({"a": {"x": 1}}, {"x": (0, 4)}),
            ({"u": {"x": 1}, "d": {"x": -1}}, {"x": (0, 4)}),
        ]
        links = [(0, "a", 1, "u", [], [])]
        h = chain_wsha(classes, links)
        ranks = infer_ranks(h)
        start = {"x": rat(1)}
        assert type_sched_lp(h, ranks, RunType((0,), ()), start) is None
        assert type_sched_lp(h, ranks, RunType((0, 1), ("link0_0to1",)), start) is not None


class TestWshaReachable:
    def test_robot_reaches_target(self):
        h, start, target = gen_robot_example()
        verdict = wsha_reachable(h, start, target)
        assert verdict.yes
        # The target box sits in the o3/o4 overlap; the shortest-first
        # enumeration finds the three-class route.
        assert verdict.run_type.ranks == (0, 1, 2)
        end = replay_run(h, verdict.witness, target=target)
        assert target.satisfied_by(end)

    def test_robot_deep_target_needs_full_chain(self):
        h, start, _ = gen_robot_example()
        target = Polyhedron.of(
            ("x", "y"),
            [
                constraint({"x": 1}, ">=", rat(11, 2)),
                constraint({"x": 1}, "<=", 6),
                constraint({"y": 1}, ">=", rat(-5, 2)),
                constraint({"y": 1}, "<=", rat(-11, 5)),
            ],
        )
        verdict = wsha_reachable(h, start, target)
        assert verdict.yes and verdict.run_type.ranks == (0, 1, 2, 3)
        replay_run(h, verdict.witness, target=target)

    def test_witness_rank_monotone(self):
        h, start, target = gen_robot_example()
        ranks = infer_ranks(h)
        verdict = wsha_reachable(h, start, target)
        seq = [ranks.rank[s.mode] for s in verdict.witness.steps]
        assert seq == sorted(seq)

    def test_target_outside_all_classes(self):
        h, start, _ = gen_robot_example()
        target = Polyhedron.of(("x", "y"), [constraint({"x": 1}, "=", 100)])
        verdict = wsha_reachable(h, start, target)
        assert not verdict.yes and verdict.types_checked == 0

    def test_pruning_never_changes_verdicts(self):
        h, start, target = gen_robot_example()
        v1 = wsha_reachable(h, start, target, prune=True)
        v2 = wsha_reachable(h, start, target, prune=False)
        assert v1.yes == v2.yes and v1.run_type == v2.run_type

    def test_boundary_start_rejected(self):
        h, _, target = gen_robot_example()
        with pytest.raises(PreconditionViolation):
            wsha_reachable(h, {"x": ZERO, "y": ZERO}, target)

    def test_jobs_parallel_same_answer(self):
        h, start, target = gen_robot_example()
        v1 = wsha_reachable(h, start, target)
        v2 = wsha_reachable(h, start, target, jobs=4)
        assert v1.run_type == v2.run_type and v1.yes == v2.yes


class TestWshaSchedulable:
    def test_initial_class_balances(self):
        h = make_cms({"a": {"x": 1}, "b": {"x": -1}}, {"x": (0, 1)})
        verdict = wsha_schedulable(h, {"x": rat(1, 2)})
        assert verdict.yes and verdict.run_type == RunType((0,), ())
        replay_lasso(h, verdict.witness)

    def test_acyclic_all_drift_no(self):
        classes = [
            ({"a": {"x": 1}}, {"x": (0, 9)}),
            ({"b": {"x": -2}}, {"x": (0, 9)}),
        ]
        links = [(0, "a", 1, "b", [], [])]
        h = chain_wsha(classes, links)
        verdict = wsha_schedulable(h, {"x": rat(1)})
        assert not verdict.yes

    def test_only_top_class_balances(self):
        classes = [
            ({"a": {"x": 1}}, {"x": (0, 4)}),
            ({"u": {"x": 1}, "d": {"x": -1}}, {"x": (0, 4)}),
        ]
        links = [(0, "a", 1, "u", [], [])]
        h = chain_wsha(classes, links)
        verdict = wsha_schedulable(h, {"x": rat(1)})
        assert verdict.yes and verdict.run_type.ranks == (0, 1)
        anchor = replay_lasso(h, verdict.witness)
        assert verdict.witness.period_time() > 0

    def test_robot_top_class_schedulable(self):
        h, start, _ = gen_robot_example()
        verdict = wsha_schedulable(h, start)
        assert verdict.yes and verdict.run_type.ranks[-1] == 3
        replay_lasso(h, verdict.witness)


class TestSubsetSum:
    @pytest.mark.parametrize(
        "values,k",
        [((5,), 5), ((5,), 4), ((1, 2, -3), 3), ((1, 2, -3), 0), ((1, 2), 4), ((2, 3, 7), 10)],
    )
    def test_matches_brute_force(self, values, k):
        h, start, target = gen_subset_sum(SubsetSumInstance(values, k))
        verdict = wsha_reachable(h, start, target)
        assert verdict.yes == brute_force_subset_sum(values, k)
        if verdict.yes:
            end = replay_run(h, verdict.witness, target=target)
            assert end[f"x{len(values) + 1}"] == k

    def test_randomized_against_brute_force(self):
        rng = random.Random(1234)
        agree = 0
        for _ in range(25):
            n = rng.randint(1, 5)
            values = tuple(rng.choice([v for v in range(-8, 9) if v != 0]) for _ in range(n))
            k = rng.randint(-10, 10)
            h, start, target = gen_subset_sum(SubsetSumInstance(values, k))
            verdict = wsha_reachable(h, start, target)
            assert verdict.yes == brute_force_subset_sum(values, k)
            agree += 1
        assert agree == 25
