import pytest

from vnembed.errors import InstanceError
from vnembed.extraction import confluence_edge_labels, order_from_document
from vnembed.generators import cactus, half_wheel, hypergraph_eo, tree, two_half_wheels
from vnembed.instance import load_instance
from vnembed.multiroot import orient_multi_source, partition_root_regions


def test_half_wheel_structure():
    doc = half_wheel(9)
    inst = load_instance(doc["instance"])
    assert len(inst.request.nodes) == 10
    assert len(inst.request.edges) == 17
    order = order_from_document(doc["orientation"], inst.request)
    assert order.root == "w_c"


def test_half_wheel_outer_root():
    doc = half_wheel(9, root="outer")
    inst = load_instance(doc["instance"])
    order = order_from_document(doc["orientation"], inst.request)
    assert order.root == "w5"
    labels = confluence_edge_labels(order)
    assert all(labels.of(e) <= {"w_c"} for e in order.edges)


def test_two_half_wheels_joined_by_single_edge():
    doc = two_half_wheels(7)
    inst = load_instance(doc["instance"])
    # 2*(7 outer + 1 center) nodes, 2*(7+6) wheel edges + 1 bridge
    assert len(inst.request.nodes) == 16
    assert len(inst.request.edges) == 27
    roots = doc["orientation"]["roots"]
    g = orient_multi_source(inst.request, roots)
    assert set(g.roots) == set(roots)
    regions = partition_root_regions(g)
    (_, shared), = regions.pairwise.items()
    assert len(shared) == 1


def test_tree_generator():
    doc = tree(8, seed=3)
    inst = load_instance(doc["instance"])
    assert inst.request.is_tree()
    assert doc["orientation"] is None


def test_tree_reproducible():
    assert tree(8, seed=3) == tree(8, seed=3)
    assert tree(8, seed=3) != tree(8, seed=4)


def undirected_cycles_share_at_most_one_node(req):
    """Cactus check via cycle space: every edge lies on at most one simple cycle."""
    import networkx as nx

    g = nx.Graph()
    g.add_nodes_from(req.nodes)
    g.add_edges_from((i, j) for (i, j) in req.edges)
    cycles = nx.cycle_basis(g)
    seen_edges = set()
    for cyc in cycles:
        for a, b in zip(cyc, cyc[1:] + cyc[:1]):
            key = frozenset((a, b))
            if key in seen_edges:
                return False
            seen_edges.add(key)
    return True


def test_cactus_generator():
    for seed in range(8):
        doc = cactus(10, seed=seed)
        inst = load_instance(doc["instance"])
        assert undirected_cycles_share_at_most_one_node(inst.request)
        assert len(inst.request.nodes) <= 10
        assert len(inst.request.edges) >= len(inst.request.nodes) - 1  # has a cycle


def test_hypergraph_eo_generator():
    doc = hypergraph_eo([["a", "b"], ["b", "c"]])
    inst = load_instance(doc["instance"])
    order = order_from_document(doc["orientation"], inst.request)
    labels = confluence_edge_labels(order)
    out_sets = {labels.of(e) for e in order.out_edges["root"]}
    maximal = {s for s in out_sets if not any(s < t for t in out_sets)}
    assert maximal == {frozenset({"a", "b"}), frozenset({"b", "c"})}


def test_generators_reject_bad_params():
    with pytest.raises(InstanceError):
        half_wheel(1)
    with pytest.raises(InstanceError):
        cactus(2, seed=0)
