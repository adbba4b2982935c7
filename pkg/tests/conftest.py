import random

import pytest

from vnembed.instance import Instance, MappingResult, RequestGraph, SubstrateGraph


def make_substrate(n=3, caps=10.0, edge_caps=10.0, types=("t",), mesh=True, prefix="u"):
    """Full-mesh substrate with `n` nodes, every node supporting all types."""
    nodes = [f"{prefix}{k}" for k in range(n)]
    edges = []
    if mesh:
        for a in nodes:
            for b in nodes:
                if a != b:
                    edges.append((a, b))
    return SubstrateGraph(
        nodes=tuple(sorted(nodes)),
        edges=tuple(sorted(edges)),
        types=frozenset(types),
        supported_types={u: frozenset(types) for u in nodes},
        node_capacity={(u, tau): caps for u in nodes for tau in types},
        edge_capacity={e: edge_caps for e in edges},
    )


def make_request(edges, demand=1.0, edge_demand=1.0, typ="t"):
    nodes = tuple(sorted({v for e in edges for v in e}))
    return RequestGraph(
        nodes=nodes,
        edges=tuple(sorted(edges)),
        node_type={i: typ for i in nodes},
        node_demand={i: demand for i in nodes},
        edge_demand={e: edge_demand for e in edges},
    )


def make_instance(request_edges, substrate_nodes=3, caps=10.0, node_cost=None, edge_cost=None):
    return Instance(
        substrate=make_substrate(n=substrate_nodes, caps=caps, edge_caps=caps),
        request=make_request(request_edges),
        node_cost=node_cost or {},
        edge_cost=edge_cost or {},
    )


@pytest.fixture
def triangle_instance():
    """Single-edge request (i,j) on the 3-node full-mesh substrate."""
    return make_instance([("i", "j")])


@pytest.fixture
def diamond_instance():
    """Diamond request r->a, r->b, a->t, b->t on a 3-node substrate."""
    return make_instance([("r", "a"), ("r", "b"), ("a", "t"), ("b", "t")])


@pytest.fixture
def worked_example_instance():
    """Request i,j,k,l over substrate u,v,w as in the worked mapping example."""
    sub = SubstrateGraph(
        nodes=("u", "v", "w"),
        edges=tuple(sorted([(a, b) for a in "uvw" for b in "uvw" if a != b])),
        types=frozenset({"t"}),
        supported_types={x: frozenset({"t"}) for x in "uvw"},
        node_capacity={(x, "t"): 10.0 for x in "uvw"},
        edge_capacity={(a, b): 10.0 for a in "uvw" for b in "uvw" if a != b},
    )
    req = RequestGraph(
        nodes=("i", "j", "k", "l"),
        edges=(("i", "j"), ("j", "k"), ("j", "l")),
        node_type={x: "t" for x in "ijkl"},
        node_demand={x: 1.0 for x in "ijkl"},
        edge_demand={e: 1.0 for e in [("i", "j"), ("j", "k"), ("j", "l")]},
    )
    return Instance(substrate=sub, request=req)


@pytest.fixture
def worked_example_mapping():
    return MappingResult(
        node_map={"i": "u", "j": "v", "k": "w", "l": "u"},
        edge_map={
            ("i", "j"): (("u", "v"),),
            ("j", "k"): (("v", "w"),),
            ("j", "l"): (("v", "w"), ("w", "u")),
        },
    )


def random_connected_request(rng: random.Random, n_nodes: int, extra_edges: int, typ="t"):
    """Random connected request: a random tree plus up to `extra_edges` chords."""
    names = [f"n{k}" for k in range(n_nodes)]
    edges = set()
    for k in range(1, n_nodes):
        p = names[rng.randrange(k)]
        edges.add((p, names[k]) if rng.random() < 0.5 else (names[k], p))
    tries = 0
    while extra_edges > 0 and tries < 50:
        tries += 1
        a, b = rng.sample(names, 2)
        if (a, b) in edges or (b, a) in edges:
            continue
        edges.add((a, b))
        extra_edges -= 1
    return make_request(sorted(edges))
