"""Instance generators: half-wheels, cacti, trees, two joined half-wheels, and
the hypergraph-to-extraction-order reduction. Each generator returns a JSON
document {"instance": ..., "orientation": ...} with the orientation null when
no canonical one exists. Randomized kinds require an explicit seed and are
byte-reproducible for equal seeds.
"""

from __future__ import annotations

import random
from typing import Iterable, Optional, Sequence

from .errors import InstanceError
from .extraction import ExtractionOrder, confluence_edge_labels, order_to_document
from .instance import Edge
from .orderings import SetFamily, hypergraph_extraction_order

_TYPE = "t"


def _substrate_doc(n_nodes: int, node_cap: float, edge_cap: float) -> dict:
    """Full-mesh substrate with one shared type and graded node costs."""
    nodes = [f"u{k}" for k in range(n_nodes)]
    return {
        "nodes": [{"id": u, "types": [_TYPE], "capacity": {_TYPE: node_cap}} for u in nodes],
        "edges": [
            {"tail": a, "head": b, "capacity": edge_cap}
            for a in nodes
            for b in nodes
            if a != b
        ],
    }


def _instance_doc(
    request_nodes: Sequence[str],
    request_edges: Sequence[Edge],
    substrate_nodes: int,
    node_demand: float = 1.0,
    edge_demand: float = 1.0,
    costs: Optional[dict] = None,
) -> dict:
    total_node = node_demand * len(request_nodes)
    total_edge = edge_demand * max(1, len(request_edges)) * 2
    doc = {
        "substrate": _substrate_doc(substrate_nodes, total_node, total_edge),
        "request": {
            "nodes": [
                {"id": i, "type": _TYPE, "demand": node_demand} for i in sorted(request_nodes)
            ],
            "edges": [
                {"tail": i, "head": j, "demand": edge_demand} for (i, j) in sorted(request_edges)
            ],
        },
    }
    if costs:
        doc["costs"] = costs
    return doc


def _graded_costs(substrate_nodes: int) -> dict:
    """Distinct per-node costs so the cheapest placement is unique."""
    return {
        "node": {f"u{k}.{_TYPE}": 1.0 + 0.1 * k for k in range(substrate_nodes)},
        "edge": {},
    }


def half_wheel_rim_and_spokes(n: int, prefix: str = "w") -> tuple[list[str], list[Edge], list[Edge]]:
    center = f"{prefix}_c"
    outer = [f"{prefix}{k}" for k in range(1, n + 1)]
    spokes = [(center, o) for o in outer]
    rim = [(outer[k], outer[k + 1]) for k in range(n - 1)]
    return [center] + outer, spokes, rim


def central_root_orientation(n: int, prefix: str = "w", ends: str = "even") -> ExtractionOrder:
    """Central root, spokes outward, rim edges alternating.

    With ends="even" the even outer nodes are the confluence end nodes (the
    single-bag picture; width grows linearly); ends="odd" flips the rim so the
    odd nodes end the confluences. Either way a constant-width label set
    ordering exists.
    """
    if ends not in ("even", "odd"):
        raise InstanceError(f"ends must be 'even' or 'odd', got {ends!r}")
    nodes, spokes, rim = half_wheel_rim_and_spokes(n, prefix)
    center = nodes[0]
    edges: list[Edge] = list(spokes)
    rev: set[Edge] = set()
    source_parity = 1 if ends == "even" else 0
    for (a, b) in rim:
        ka = int(a[len(prefix):])
        if ka % 2 == source_parity:
            edges.append((a, b))
        else:
            edges.append((b, a))
            rev.add((b, a))
    return ExtractionOrder(
        nodes=tuple(sorted(nodes)), edges=tuple(sorted(edges)), root=center, reversed_edges=frozenset(rev)
    )


def outer_root_orientation(n: int, prefix: str = "w", root_index: Optional[int] = None) -> ExtractionOrder:
    """Outer root, all spokes pointing into the center, rim oriented outward
    from the root; every confluence ends at the center (width 2)."""
    nodes, spokes, rim = half_wheel_rim_and_spokes(n, prefix)
    center = nodes[0]
    if root_index is None:
        root_index = (n + 1) // 2
    root = f"{prefix}{root_index}"
    edges: list[Edge] = []
    rev: set[Edge] = set()
    for (c, o) in spokes:
        edges.append((o, c))
        rev.add((o, c))
    for (a, b) in rim:
        ka = int(a[len(prefix):])
        kb = int(b[len(prefix):])
        # orient away from the root along the rim path
        if abs(ka - root_index) <= abs(kb - root_index):
            edges.append((a, b))
        else:
            edges.append((b, a))
            rev.add((b, a))
    return ExtractionOrder(
        nodes=tuple(sorted(nodes)), edges=tuple(sorted(edges)), root=root, reversed_edges=frozenset(rev)
    )


def half_wheel(n: int, substrate_nodes: int = 3, root: str = "center") -> dict:
    """Half-wheel instance plus the canonical orientation for `root` placement
    ("center" = alternating rim, "outer" = spokes inward)."""
    if n < 2:
        raise InstanceError("half-wheel needs at least 2 outer nodes")
    nodes, spokes, rim = half_wheel_rim_and_spokes(n)
    # The instance's directed request edges follow the canonical orientation so
    # the orientation document has reversed=False everywhere.
    if root == "center":
        order = central_root_orientation(n)
    elif root == "outer":
        order = outer_root_orientation(n)
    else:
        raise InstanceError(f"unknown half-wheel root placement {root!r}")
    instance = _instance_doc(
        nodes, order.edges, substrate_nodes, costs=_graded_costs(substrate_nodes)
    )
    plain = ExtractionOrder(
        nodes=order.nodes, edges=order.edges, root=order.root, reversed_edges=frozenset()
    )
    return {"instance": instance, "orientation": order_to_document(plain)}


def two_half_wheels(n: int, substrate_nodes: int = 4) -> dict:
    """Two half-wheels joined by a single edge, oriented with one outer root in
    each wheel; the derived root set has exactly those two roots."""
    if n < 2:
        raise InstanceError("half-wheel needs at least 2 outer nodes")
    o1 = outer_root_orientation(n, prefix="a")
    o2 = outer_root_orientation(n, prefix="b")
    bridge: Edge = ("a1", "b1")  # head b1 keeps b-side root b_mid with indegree 0
    nodes = list(o1.nodes) + list(o2.nodes)
    edges = list(o1.edges) + list(o2.edges) + [bridge]
    instance = _instance_doc(nodes, edges, substrate_nodes, costs=_graded_costs(substrate_nodes))
    orientation = {
        "roots": [o1.root, o2.root],
        "edges": [
            {"tail": i, "head": j, "reversed": False, "labels": []} for (i, j) in sorted(edges)
        ],
    }
    return {"instance": instance, "orientation": orientation}


def tree(n: int, seed: int, substrate_nodes: int = 3) -> dict:
    """Random tree on n nodes (random attachment)."""
    if n < 1:
        raise InstanceError("tree needs at least one node")
    rng = random.Random(seed)
    names = [f"n{k}" for k in range(n)]
    edges: list[Edge] = []
    for k in range(1, n):
        p = names[rng.randrange(k)]
        edges.append((p, names[k]))
    instance = _instance_doc(names, edges, substrate_nodes, costs=_graded_costs(substrate_nodes))
    return {"instance": instance, "orientation": None}


def cactus(n: int, seed: int, substrate_nodes: int = 3) -> dict:
    """Random cactus with at least one cycle; cycles pairwise share at most a
    node (each new cycle adds fresh nodes hung off one existing node)."""
    if n < 3:
        raise InstanceError("cactus needs at least 3 nodes")
    rng = random.Random(seed)
    names = [f"n{k}" for k in range(n)]
    edges: list[Edge] = []
    used = 1
    # first cycle, 3..min(n, 5) nodes
    first_len = rng.randint(3, min(n, 5))
    cycle = [names[0]] + names[used : used + first_len - 1]
    used += first_len - 1
    for a, b in zip(cycle, cycle[1:] + cycle[:1]):
        edges.append((a, b))
    while used < n:
        anchor = names[rng.randrange(used)]
        room = n - used
        if room >= 2 and rng.random() < 0.5:
            clen = rng.randint(3, min(room + 1, 5))
            fresh = names[used : used + clen - 1]
            used += clen - 1
            cyc = [anchor] + fresh
            for a, b in zip(cyc, cyc[1:] + cyc[:1]):
                edges.append((a, b))
        else:
            edges.append((anchor, names[used]))
            used += 1
    instance = _instance_doc(
        names[:used], edges, substrate_nodes, costs=_graded_costs(substrate_nodes)
    )
    return {"instance": instance, "orientation": None}


def hypergraph_eo(family: Iterable[Iterable[str]], substrate_nodes: int = 3) -> dict:
    """Instance realizing the extraction order whose root out-edge labels are
    exactly the given (reduced) set family; orientation included."""
    fam = SetFamily.of(family)
    order = hypergraph_extraction_order(fam)
    labels = confluence_edge_labels(order)
    instance = _instance_doc(
        order.nodes, order.edges, substrate_nodes, costs=_graded_costs(substrate_nodes)
    )
    return {"instance": instance, "orientation": order_to_document(order, labels)}


GENERATORS = {
    "half-wheel": half_wheel,
    "two-half-wheels": two_half_wheels,
    "tree": tree,
    "cactus": cactus,
    "hypergraph-eo": hypergraph_eo,
}
