"""Model parsing, serialization round-trips, validation and rank inference."""

import json

import pytest

from modeflow.constraints import Polyhedron, constraint
from modeflow.gen import gen_robot_example, gen_subset_sum, SubsetSumInstance
from modeflow.model import (
    HybridAutomaton,
    Mode,
    ModelSemanticError,
    ModelSyntaxError,
    NotWeakError,
    NotWeakReason,
    Transition,
    infer_ranks,
    is_cms,
    parse_model,
    serialize_model,
    validate_sha,
)
from modeflow.rationals import rat


MINIMAL = json.dumps(
    {
        "variables": ["x"],
        "modes": [{"name": "m0", "rate": [0], "invariant": []}],
        "initial": ["m0"],
        "transitions": [],
    }
)


def two_mode_cms(rate_a="1", rate_b="-1", lo=0, hi=10):
    inv = [
        {"lhs": {"x": "1"}, "op": ">", "rhs": str(lo)},
        {"lhs": {"x": "1"}, "op": "<", "rhs": str(hi)},
    ]
    return json.dumps(
        {
            "variables": ["x"],
            "modes": [
                {"name": "a", "rate": [rate_a], "invariant": inv},
                {"name": "b", "rate": [rate_b], "invariant": inv},
            ],
            "initial": ["a"],
            "transitions": [
                {"from": "a", "action": "go", "to": "b", "guard": [], "updates": []},
                {"from": "b", "action": "back", "to": "a", "guard": [], "updates": []},
            ],
        }
    )


class TestParse:
    def test_minimal_model(self):
        h = parse_model(MINIMAL)
        assert h.variables == ("x",)
        assert list(h.modes) == ["m0"]
        assert h.modes["m0"].invariant.is_top

    def test_rational_rate(self):
        doc = json.loads(MINIMAL)
        doc["modes"][0]["rate"] = ["1/3"]
        h = parse_model(json.dumps(doc))
        assert h.modes["m0"].rate["x"] == rat(1, 3)

    def test_duplicate_mode_rejected(self):
        doc = json.loads(MINIMAL)
        doc["modes"].append(doc["modes"][0])
        with pytest.raises(ModelSemanticError, match="duplicate mode"):
            parse_model(json.dumps(doc))

    def test_duplicate_action_rejected(self):
        doc = json.loads(two_mode_cms())
        doc["transitions"].append(doc["transitions"][0])
        with pytest.raises(ModelSemanticError, match="duplicate action"):
            parse_model(json.dumps(doc))

    def test_dangling_reference(self):
        doc = json.loads(MINIMAL)
        doc["initial"] = ["nope"]
        with pytest.raises(ModelSemanticError, match="unknown mode"):
            parse_model(json.dumps(doc))

    def test_rate_length_mismatch(self):
        doc = json.loads(MINIMAL)
        doc["modes"][0]["rate"] = [0, 1]
        with pytest.raises(ModelSemanticError, match="rate vector"):
            parse_model(json.dumps(doc))

    def test_syntax_error_has_line(self):
        with pytest.raises(ModelSyntaxError) as err:
            parse_model("{\n  broken\n}")
        assert err.value.line == 2

    def test_decimal_rationals_rejected(self):
        doc = json.loads(MINIMAL)
        doc["modes"][0]["rate"] = ["0.5"]
        with pytest.raises(ModelSemanticError):
            parse_model(json.dumps(doc))

    def test_trivial_constraint_resolved(self):
        doc = json.loads(MINIMAL)
        doc["modes"][0]["invariant"] = [{"lhs": {}, "op": "<", "rhs": "1"}]
        assert parse_model(json.dumps(doc)).modes["m0"].invariant.is_top
        doc["modes"][0]["invariant"] = [{"lhs": {}, "op": "=", "rhs": "1"}]
        assert parse_model(json.dumps(doc)).modes["m0"].invariant.is_bottom


class TestRoundTrip:
    @pytest.mark.parametrize("builder", ["robot", "subset", "cms"])
    def test_parse_serialize_identity(self, builder):
        if builder == "robot":
            h, _, _ = gen_robot_example()
        elif builder == "subset":
            h, _, _ = gen_subset_sum(SubsetSumInstance((1, 2, -3), 3))
        else:
            h = parse_model(two_mode_cms())
        again = parse_model(serialize_model(h))
        assert again == h

    def test_serialization_is_deterministic(self):
        h, _, _ = gen_robot_example()
        assert serialize_model(h) == serialize_model(parse_model(serialize_model(h)))


class TestValidate:
    def test_empty_invariant_flagged(self):
        doc = json.loads(MINIMAL)
        doc["modes"][0]["invariant"] = [
            {"lhs": {"x": "1"}, "op": "<", "rhs": "0"},
            {"lhs": {"x": "1"}, "op": ">", "rhs": "1"},
        ]
        diags = validate_sha(parse_model(json.dumps(doc)))
        assert any("empty invariant" in d.message for d in diags)
        assert any(d.severity == "error" for d in diags)  # initial mode

    def test_unbounded_invariant_warns(self):
        diags = validate_sha(parse_model(MINIMAL))
        assert [d.severity for d in diags] == ["warning"]
        assert "unbounded" in diags[0].message

    def test_consistent_model_clean(self):
        h = parse_model(two_mode_cms())
        assert validate_sha(h) == []


class TestInferRanks:
    def test_robot_classes(self):
        h, _, _ = gen_robot_example()
        ranks = infer_ranks(h)
        groups = {r: sorted(cls.modes) for r, cls in ranks.classes.items()}
        assert groups == {
            0: ["m1", "m2"],
            1: ["m3"],
            2: ["m4"],
            3: ["m5", "m6", "m7"],
        }
        assert not is_cms(h, ranks)

    def test_rank_monotone_over_transitions(self):
        h, _, _ = gen_robot_example()
        ranks = infer_ranks(h)
        for t in h.transitions.values():
            assert ranks.rank[t.source] <= ranks.rank[t.target]

    def test_cms_single_class(self):
        h = parse_model(two_mode_cms())
        ranks = infer_ranks(h)
        assert ranks.count == 1 and is_cms(h, ranks)

    def test_self_loop_cms(self):
        doc = {
            "variables": ["x"],
            "modes": [
                {
                    "name": "m",
                    "rate": [0],
                    "invariant": [
                        {"lhs": {"x": "1"}, "op": ">", "rhs": "0"},
                        {"lhs": {"x": "1"}, "op": "<", "rhs": "1"},
                    ],
                }
            ],
            "initial": ["m"],
            "transitions": [{"from": "m", "action": "stay", "to": "m", "guard": [], "updates": []}],
        }
        ranks = infer_ranks(parse_model(json.dumps(doc)))
        assert is_cms(parse_model(json.dumps(doc)), ranks)

    def test_intra_class_guard_rejected(self):
        doc = json.loads(two_mode_cms())
        doc["transitions"][0]["guard"] = [{"lhs": {"x": "1"}, "op": "<", "rhs": "1"}]
        with pytest.raises(NotWeakError) as err:
            infer_ranks(parse_model(json.dumps(doc)))
        assert err.value.reason is NotWeakReason.INTRA_CLASS_GUARD

    def test_intra_class_update_rejected(self):
        doc = json.loads(two_mode_cms())
        doc["transitions"][0]["updates"] = [{"var": "x", "kind": "set", "amount": "0"}]
        with pytest.raises(NotWeakError) as err:
            infer_ranks(parse_model(json.dumps(doc)))
        assert err.value.reason is NotWeakReason.INTRA_CLASS_UPDATE

    def test_unbounded_invariant_rejected(self):
        doc = json.loads(two_mode_cms())
        for m in doc["modes"]:
            m["invariant"] = []
        with pytest.raises(NotWeakError) as err:
            infer_ranks(parse_model(json.dumps(doc)))
        assert err.value.reason is NotWeakReason.UNBOUNDED_OR_CLOSED_INVARIANT

    def test_closed_invariant_rejected(self):
        doc = json.loads(two_mode_cms())
        for m in doc["modes"]:
            m["invariant"] = [
                {"lhs": {"x": "1"}, "op": ">=", "rhs": "0"},
                {"lhs": {"x": "1"}, "op": "<", "rhs": "10"},
            ]
        with pytest.raises(NotWeakError) as err:
            infer_ranks(parse_model(json.dumps(doc)))
        assert err.value.reason is NotWeakReason.UNBOUNDED_OR_CLOSED_INVARIANT

    def test_invariant_mismatch_rejected(self):
        doc = json.loads(two_mode_cms())
        doc["modes"][1]["invariant"] = [
            {"lhs": {"x": "1"}, "op": ">", "rhs": "0"},
            {"lhs": {"x": "1"}, "op": "<", "rhs": "9"},
        ]
        with pytest.raises(NotWeakError) as err:
            infer_ranks(parse_model(json.dumps(doc)))
        assert err.value.reason is NotWeakReason.INVARIANT_MISMATCH_WITHIN_CLASS

    def test_scaled_invariant_still_matches(self):
        # 2x < 20 normalizes to the same canonical row as x < 10.
        doc = json.loads(two_mode_cms())
        doc["modes"][1]["invariant"] = [
            {"lhs": {"x": "1"}, "op": ">", "rhs": "0"},
            {"lhs": {"x": "2"}, "op": "<", "rhs": "20"},
        ]
        assert infer_ranks(parse_model(json.dumps(doc))).count == 1

    def test_additive_update_rejected(self):
        h, _, _ = gen_robot_example()
        doc = json.loads(serialize_model(h))
        doc["transitions"][2]["updates"] = [{"var": "x", "kind": "add", "amount": "1"}]
        with pytest.raises(NotWeakError) as err:
            infer_ranks(parse_model(json.dumps(doc)))
        assert err.value.reason is NotWeakReason.ADD_UPDATE

    def test_deterministic_numbering(self):
        h, _, _ = gen_robot_example()
        text = serialize_model(h)
        r1 = infer_ranks(parse_model(text))
        r2 = infer_ranks(parse_model(text))
        assert r1.rank == r2.rank

    def test_subset_sum_is_weak(self):
        h, _, _ = gen_subset_sum(SubsetSumInstance((1, 2, -3), 3))
        ranks = infer_ranks(h)
        assert ranks.count == len(h.modes)
