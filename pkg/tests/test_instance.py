import json
import random

import pytest

from vnembed.errors import InstanceError
from vnembed.instance import (
    MappingResult,
    allocations,
    dump_instance,
    load_instance,
    mapping_cost,
    project_mapping,
    validate_mapping,
)

from conftest import make_instance, make_request, random_connected_request

MINIMAL_DOC = {
    "substrate": {
        "nodes": [
            {"id": "u", "types": ["t"], "capacity": {"t": 2}},
            {"id": "v", "types": ["t"], "capacity": {"t": 2}},
            {"id": "w", "types": ["t"], "capacity": {"t": 2}},
        ],
        "edges": [
            {"tail": "u", "head": "v", "capacity": 3},
            {"tail": "v", "head": "w", "capacity": 3},
            {"tail": "w", "head": "u", "capacity": 3},
        ],
    },
    "request": {
        "nodes": [
            {"id": "i", "type": "t", "demand": 1},
            {"id": "j", "type": "t", "demand": 1},
        ],
        "edges": [{"tail": "i", "head": "j", "demand": 1}],
    },
}


class TestLoadInstance:
    def test_minimal_document(self):
        inst = load_instance(json.dumps(MINIMAL_DOC))
        assert len(inst.substrate.nodes) == 3
        assert len(inst.request.edges) == 1

    def test_antiparallel_request_rejected(self):
        doc = json.loads(json.dumps(MINIMAL_DOC))
        doc["request"]["edges"].append({"tail": "j", "head": "i", "demand": 1})
        with pytest.raises(InstanceError, match="antiparallel"):
            load_instance(doc)

    def test_loop_edge_rejected(self):
        doc = json.loads(json.dumps(MINIMAL_DOC))
        doc["substrate"]["edges"].append({"tail": "u", "head": "u", "capacity": 1})
        with pytest.raises(InstanceError, match="loop"):
            load_instance(doc)

    def test_unknown_type_rejected(self):
        doc = json.loads(json.dumps(MINIMAL_DOC))
        doc["request"]["nodes"][0]["type"] = "gpu"
        with pytest.raises(InstanceError, match="unknown type"):
            load_instance(doc)

    def test_nonpositive_capacity_rejected(self):
        doc = json.loads(json.dumps(MINIMAL_DOC))
        doc["substrate"]["edges"][0]["capacity"] = 0
        with pytest.raises(InstanceError, match="onpositive"):
            load_instance(doc)

    def test_parse_error(self):
        with pytest.raises(InstanceError, match="invalid JSON"):
            load_instance("{not json")

    def test_bad_identifier_rejected(self):
        doc = json.loads(json.dumps(MINIMAL_DOC))
        doc["request"]["nodes"][0]["id"] = "a->b"
        with pytest.raises(InstanceError, match="identifier"):
            load_instance(doc)

    def test_costs_parsed(self):
        doc = json.loads(json.dumps(MINIMAL_DOC))
        doc["costs"] = {"node": {"u.t": 2.5}, "edge": {"u->v": 0.5}}
        inst = load_instance(doc)
        assert inst.cost_of_node_resource("u", "t") == 2.5
        assert inst.cost_of_node_resource("v", "t") == 1.0
        assert inst.cost_of_edge_resource(("u", "v")) == 0.5

    def test_half_wheel_counts(self):
        from vnembed.generators import half_wheel

        doc = half_wheel(9)
        inst = load_instance(doc["instance"])
        assert len(inst.request.nodes) == 10
        assert len(inst.request.edges) == 9 + 8  # n spokes + (n-1) rim edges

    def test_dump_round_trip(self):
        inst = load_instance(MINIMAL_DOC)
        again = load_instance(dump_instance(inst))
        assert again == inst


class TestValidateMapping:
    def test_worked_example_valid(self, worked_example_instance, worked_example_mapping):
        rep = validate_mapping(worked_example_instance, worked_example_mapping)
        assert rep.valid, rep.violations

    def test_missing_node(self, worked_example_instance, worked_example_mapping):
        m = MappingResult(
            node_map={k: v for k, v in worked_example_mapping.node_map.items() if k != "l"},
            edge_map=worked_example_mapping.edge_map,
        )
        rep = validate_mapping(worked_example_instance, m)
        assert not rep.valid
        assert any("unmapped node l" in v for v in rep.violations)

    def test_path_endpoint_mismatch(self, worked_example_instance, worked_example_mapping):
        bad = dict(worked_example_mapping.edge_map)
        bad[("j", "l")] = (("v", "w"),)  # ends at w, l sits on u
        rep = validate_mapping(worked_example_instance, MappingResult(worked_example_mapping.node_map, bad))
        assert not rep.valid
        assert any("endpoint mismatch" in v for v in rep.violations)


class TestAllocations:
    def test_node_additivity(self):
        inst = make_instance([("a", "b")])
        m = MappingResult(node_map={"a": "u0", "b": "u0"}, edge_map={("a", "b"): ()})
        alloc = allocations(inst, m)
        assert alloc[("u0", "t")] == pytest.approx(2.0)

    def test_edge_accounting(self):
        from vnembed.instance import Instance
        from conftest import make_substrate

        inst = Instance(
            substrate=make_substrate(n=3),
            request=make_request([("a", "b")], edge_demand=3.0),
        )
        m = MappingResult(
            node_map={"a": "u0", "b": "u2"},
            edge_map={("a", "b"): (("u0", "u1"), ("u1", "u2"))},
        )
        alloc = allocations(inst, m)
        assert alloc[("u0", "u1")] == pytest.approx(3.0)
        assert alloc[("u1", "u2")] == pytest.approx(3.0)

    def test_matches_independent_recomputation(self):
        rng = random.Random(7)
        inst = make_instance([("a", "b"), ("b", "c"), ("b", "d")], substrate_nodes=3)
        m = MappingResult(
            node_map={"a": "u0", "b": "u1", "c": "u2", "d": "u0"},
            edge_map={
                ("a", "b"): (("u0", "u1"),),
                ("b", "c"): (("u1", "u2"),),
                ("b", "d"): (("u1", "u0"),),
            },
        )
        alloc = allocations(inst, m)
        # independent second pass
        expect = {}
        for i, u in m.node_map.items():
            key = (u, "t")
            expect[key] = expect.get(key, 0.0) + inst.request.node_demand[i]
        for e, path in m.edge_map.items():
            for arc in path:
                expect[arc] = expect.get(arc, 0.0) + inst.request.edge_demand[e]
        assert alloc == pytest.approx(expect)

    def test_nonnegative(self, worked_example_instance, worked_example_mapping):
        assert all(v >= 0 for v in allocations(worked_example_instance, worked_example_mapping).values())


class TestProjection:
    def test_identity(self, worked_example_instance, worked_example_mapping):
        m = project_mapping(
            worked_example_mapping,
            worked_example_instance.request.nodes,
            worked_example_instance.request.edges,
        )
        assert m == worked_example_mapping
        assert validate_mapping(worked_example_instance, m).valid

    def test_empty(self, worked_example_mapping):
        m = project_mapping(worked_example_mapping, (), ())
        assert m.node_map == {} and m.edge_map == {}

    def test_worked_example_subset(self, worked_example_mapping):
        m = project_mapping(worked_example_mapping, {"i", "k"}, ())
        assert m.node_map == {"i": "u", "k": "w"}


def test_mapping_cost_uses_unit_costs():
    inst = make_instance([("a", "b")], node_cost={("u0", "t"): 2.0})
    m = MappingResult(node_map={"a": "u0", "b": "u1"}, edge_map={("a", "b"): (("u0", "u1"),)})
    # 2.0*1 (a at u0) + 1.0*1 (b at u1) + 1.0*1 (edge)
    assert mapping_cost(inst, m) == pytest.approx(4.0)


def test_random_requests_connected():
    rng = random.Random(0)
    for _ in range(20):
        req = random_connected_request(rng, rng.randint(2, 6), rng.randint(0, 2))
        assert req._connected()
