"""Generalized (multi-root) extraction orders: root regions, induced orders,
multi-root confluence labels, and the two-stage stitching decomposition.

A generalized order drops rootedness; its in-degree-zero nodes are local
roots. Regions partition the edges so each region is rooted at one local
root; boundary nodes shared between regions get extra labels via virtual
chains so that per-region mappings always agree where regions meet.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Mapping as TMapping, Optional, Sequence

from .decompose import DecompositionState, decompose_rip
from .errors import DecompositionError, OrientationError, RegionError
from .extraction import (
    EdgeLabelAssignment,
    ExtractionOrder,
    confluence_edge_labels,
    reachable_from,
    topological_order,
)
from .instance import (
    ConvexCombination,
    Edge,
    Instance,
    MappingResult,
    RequestGraph,
)
from .lp import RegionSpec
from .orderings import (
    LabelSetOrdering,
    auto_label_set_ordering,
    bag_label_set_ordering,
)


@dataclass(frozen=True)
class GeneralizedOrder:
    """Acyclic orientation of the request; roots are derived (in-degree 0)."""

    nodes: tuple[str, ...]
    edges: tuple[Edge, ...]
    reversed_edges: frozenset[Edge]

    def __post_init__(self):
        if topological_order(self.nodes, self.edges) is None:
            raise OrientationError("generalized order contains a directed cycle")
        out = self.out_edges
        reach: set[str] = set()
        for r in self.roots:
            reach |= reachable_from(r, out)
        if reach != set(self.nodes):
            raise OrientationError("some node is unreachable from every root")

    @cached_property
    def roots(self) -> tuple[str, ...]:
        indeg = {i: 0 for i in self.nodes}
        for (_, j) in self.edges:
            indeg[j] += 1
        return tuple(sorted(i for i in self.nodes if indeg[i] == 0))

    @cached_property
    def out_edges(self) -> dict[str, tuple[Edge, ...]]:
        adj: dict[str, list[Edge]] = {i: [] for i in self.nodes}
        for e in self.edges:
            adj[e[0]].append(e)
        return {i: tuple(sorted(es)) for i, es in adj.items()}

    def orig_edge(self, e: Edge) -> Edge:
        return (e[1], e[0]) if e in self.reversed_edges else e


@dataclass(frozen=True)
class RegionSubgraph:
    """One root region as a rooted view usable by the LP build and walker."""

    nodes: tuple[str, ...]
    edges: tuple[Edge, ...]
    root: str
    reversed_edges: frozenset[Edge]

    def orig_edge(self, e: Edge) -> Edge:
        return (e[1], e[0]) if e in self.reversed_edges else e


@dataclass(frozen=True)
class RootRegions:
    region_edges: TMapping[str, tuple[Edge, ...]]  # root -> edges
    region_nodes: TMapping[str, tuple[str, ...]]
    boundaries: TMapping[str, frozenset[str]]  # B_r
    pairwise: TMapping[tuple[str, str], frozenset[str]]  # (r, r') sorted -> nodes
    sigma: TMapping[tuple[str, str], tuple[str, ...]]  # chain orderings

    def subgraph(self, g: GeneralizedOrder, r: str) -> RegionSubgraph:
        edges = self.region_edges[r]
        return RegionSubgraph(
            nodes=self.region_nodes[r],
            edges=edges,
            root=r,
            reversed_edges=frozenset(e for e in edges if e in g.reversed_edges),
        )


@dataclass(frozen=True)
class RootRegionOrder:
    roots: tuple[str, ...]
    edges: tuple[Edge, ...]
    root: str
    tree_like: bool
    incoming_boundary: TMapping[str, frozenset[str]]


def generalized_from_request(request: RequestGraph) -> GeneralizedOrder:
    """Treat the request's own edge directions as the generalized order."""
    return GeneralizedOrder(
        nodes=tuple(sorted(request.nodes)),
        edges=tuple(sorted(request.edges)),
        reversed_edges=frozenset(),
    )


def orient_multi_source(request: RequestGraph, roots: Sequence[str]) -> GeneralizedOrder:
    """Orient every undirected edge away from its first-discovered endpoint in
    a multi-source BFS seeded with `roots` in the given (priority) order."""
    root_list = list(dict.fromkeys(roots))
    for r in root_list:
        if r not in set(request.nodes):
            raise OrientationError(f"root {r!r} is not a request node")
    adj = request.undirected_adjacency
    disc: dict[str, int] = {}
    queue = deque()
    for k, r in enumerate(root_list):
        disc[r] = k
        queue.append(r)
    counter = len(root_list)
    while queue:
        x = queue.popleft()
        for y in adj[x]:
            if y not in disc:
                disc[y] = counter
                counter += 1
                queue.append(y)
    if len(disc) != len(request.nodes):
        raise OrientationError("request is disconnected")
    oriented, rev = [], set()
    for (i, j) in request.edges:
        if disc[i] < disc[j]:
            oriented.append((i, j))
        else:
            oriented.append((j, i))
            rev.add((j, i))
    return GeneralizedOrder(
        nodes=tuple(sorted(request.nodes)),
        edges=tuple(sorted(oriented)),
        reversed_edges=frozenset(rev),
    )


def partition_root_regions(g: GeneralizedOrder) -> RootRegions:
    """Assign every node (with all its out-edges) to the first root reaching
    it in a lexicographic-priority multi-source BFS."""
    owner: dict[str, str] = {}
    queue = deque()
    for r in g.roots:
        owner[r] = r
        queue.append(r)
    while queue:
        x = queue.popleft()
        for (_, y) in g.out_edges[x]:
            if y not in owner:
                owner[y] = owner[x]
                queue.append(y)
    region_edges: dict[str, list[Edge]] = {r: [] for r in g.roots}
    for e in g.edges:
        region_edges[owner[e[0]]].append(e)
    region_nodes = {
        r: tuple(sorted({v for e in es for v in e} | {r})) for r, es in region_edges.items()
    }
    node_sets = {r: set(ns) for r, ns in region_nodes.items()}
    boundaries = {}
    for r in g.roots:
        others: set[str] = set()
        for r2 in g.roots:
            if r2 != r:
                others |= node_sets[r2]
        boundaries[r] = frozenset(node_sets[r] & others)
    pairwise: dict[tuple[str, str], frozenset[str]] = {}
    sigma: dict[tuple[str, str], tuple[str, ...]] = {}
    for r1, r2 in itertools.combinations(sorted(g.roots), 2):
        shared = frozenset(node_sets[r1] & node_sets[r2])
        if shared:
            pairwise[(r1, r2)] = shared
            sigma[(r1, r2)] = tuple(sorted(shared))
    # reject oriented edges joining two nodes of the same pairwise boundary
    offending = []
    for (r1, r2), shared in pairwise.items():
        for (a, b) in g.edges:
            if a in shared and b in shared:
                offending.append(((r1, r2), (a, b)))
    if offending:
        raise RegionError(
            "edges inside a pairwise boundary are not supported: "
            + ", ".join(f"{e} in boundary of {pair}" for pair, e in offending)
        )
    return RootRegions(
        region_edges={r: tuple(sorted(es)) for r, es in region_edges.items()},
        region_nodes=region_nodes,
        boundaries=boundaries,
        pairwise=pairwise,
        sigma=sigma,
    )


def root_region_order(
    g: GeneralizedOrder, regions: RootRegions, chosen_root: str
) -> RootRegionOrder:
    """Orient region adjacency away from the chosen root via BFS."""
    if chosen_root not in set(g.roots):
        raise OrientationError(f"{chosen_root!r} is not one of the local roots {g.roots}")
    adj: dict[str, set[str]] = {r: set() for r in g.roots}
    for (r1, r2) in regions.pairwise:
        adj[r1].add(r2)
        adj[r2].add(r1)
    disc = {chosen_root: 0}
    queue = deque([chosen_root])
    counter = 1
    while queue:
        x = queue.popleft()
        for y in sorted(adj[x]):
            if y not in disc:
                disc[y] = counter
                counter += 1
                queue.append(y)
    if len(disc) != len(g.roots):
        raise OrientationError("root region adjacency is disconnected")
    edges = []
    for (r1, r2) in regions.pairwise:
        edges.append((r1, r2) if disc[r1] < disc[r2] else (r2, r1))
    tree_like = len(edges) == len(g.roots) - 1
    incoming: dict[str, frozenset[str]] = {}
    for r in g.roots:
        inc: set[str] = set()
        for (a, b) in edges:
            if b == r:
                key = (a, b) if (a, b) in regions.pairwise else (b, a)
                inc |= regions.pairwise[key]
        incoming[r] = frozenset(inc)
    return RootRegionOrder(
        roots=tuple(sorted(g.roots)),
        edges=tuple(sorted(edges)),
        root=chosen_root,
        tree_like=tree_like,
        incoming_boundary=incoming,
    )


# ---------------------------------------------------------------------------
# induced extraction order (virtual super-root)

SUPER_ROOT = "superroot"


def _augment_instance(
    instance: Instance, new_node: str, virtual_edges: Sequence[Edge]
) -> Instance:
    """Instance with a zero-demand wildcard-typed node and zero-demand edges."""
    req = instance.request
    if new_node in set(req.nodes):
        raise OrientationError(f"virtual node name {new_node!r} collides with the request")
    node_type = dict(req.node_type)
    node_type[new_node] = None  # wildcard: mappable onto every substrate node
    node_demand = dict(req.node_demand)
    node_demand[new_node] = 0.0
    edge_demand = dict(req.edge_demand)
    for e in virtual_edges:
        edge_demand[e] = 0.0
    new_req = RequestGraph(
        nodes=tuple(sorted(set(req.nodes) | {new_node})),
        edges=tuple(sorted(set(req.edges) | set(virtual_edges))),
        node_type=node_type,
        node_demand=node_demand,
        edge_demand=edge_demand,
    )
    return Instance(
        substrate=instance.substrate,
        request=new_req,
        node_cost=instance.node_cost,
        edge_cost=instance.edge_cost,
    )


def induced_extraction_order(
    instance: Instance, g: GeneralizedOrder, super_root: str = SUPER_ROOT
) -> tuple[ExtractionOrder, Instance]:
    """Rooted order obtained by wiring a zero-demand super-root to every local
    root; mappings transfer in both directions."""
    virtual = [(super_root, r) for r in g.roots]
    augmented = _augment_instance(instance, super_root, virtual)
    order = ExtractionOrder(
        nodes=tuple(sorted(set(g.nodes) | {super_root})),
        edges=tuple(sorted(set(g.edges) | set(virtual))),
        root=super_root,
        reversed_edges=g.reversed_edges,
    )
    return order, augmented


# ---------------------------------------------------------------------------
# multi-root confluence labels via extended root regions


def multiroot_confluence_labels(
    g: GeneralizedOrder, regions: RootRegions
) -> EdgeLabelAssignment:
    """Per region: add a virtual chain over each pairwise boundary (same sigma
    on both sides), take confluence labels of the extended region, restrict to
    the region's own edges."""
    labels: dict[Edge, frozenset[str]] = {}
    for r in sorted(g.roots):
        base_edges = list(regions.region_edges[r])
        chain_edges: list[Edge] = []
        for key, order in regions.sigma.items():
            if r not in key:
                continue
            for a, b in zip(order, order[1:]):
                chain_edges.append((a, b))
        ext_edges = base_edges + [e for e in chain_edges if e not in base_edges]
        nodes = tuple(sorted({v for e in ext_edges for v in e} | {r}))
        try:
            ext = ExtractionOrder(
                nodes=nodes,
                edges=tuple(sorted(ext_edges)),
                root=r,
                reversed_edges=frozenset(),
            )
        except OrientationError as exc:
            raise RegionError(
                f"extended region of {r!r} is not a rooted DAG "
                f"(boundary chain conflicts with region paths): {exc}"
            ) from exc
        ext_labels = confluence_edge_labels(ext)
        for e in regions.region_edges[r]:
            labels[e] = ext_labels.of(e)
    return EdgeLabelAssignment(labels=labels)


@dataclass(frozen=True)
class MultiRootOrdering:
    """Extraction label set ordering per root region."""

    per_region: TMapping[str, LabelSetOrdering]

    def for_region(self, r: str) -> LabelSetOrdering:
        return self.per_region[r]


def multiroot_orderings(
    g: GeneralizedOrder,
    regions: RootRegions,
    labels: EdgeLabelAssignment,
    mode: str = "auto",
) -> MultiRootOrdering:
    builder = auto_label_set_ordering if mode == "auto" else bag_label_set_ordering
    per_region = {}
    for r in sorted(g.roots):
        sub = regions.subgraph(g, r)
        # per-region view exposed as a rooted ExtractionOrder for the builders
        order = ExtractionOrder(
            nodes=sub.nodes, edges=sub.edges, root=r, reversed_edges=sub.reversed_edges
        )
        region_labels = EdgeLabelAssignment(
            labels={e: labels.of(e) for e in sub.edges}
        )
        per_region[r] = builder(order, region_labels)
    return MultiRootOrdering(per_region=per_region)


def region_specs(
    g: GeneralizedOrder, regions: RootRegions, omega: MultiRootOrdering
) -> list[RegionSpec]:
    return [
        RegionSpec(view=regions.subgraph(g, r), omega=omega.for_region(r), tag=r)
        for r in sorted(g.roots)
    ]


def region_report(
    g: GeneralizedOrder,
    regions: RootRegions,
    rr_order: RootRegionOrder,
    omega: MultiRootOrdering,
    labels: EdgeLabelAssignment,
) -> dict:
    """JSON region report: roots, per-region sizes, boundaries, tree-like
    flag, and per-region widths."""
    from .orderings import extraction_width as _ew

    per_region = []
    for r in sorted(g.roots):
        sub = regions.subgraph(g, r)
        order = ExtractionOrder(
            nodes=sub.nodes, edges=sub.edges, root=r, reversed_edges=sub.reversed_edges
        )
        region_labels = EdgeLabelAssignment({e: labels.of(e) for e in sub.edges})
        per_region.append(
            {
                "root": r,
                "nodes": len(sub.nodes),
                "edges": len(sub.edges),
                "boundary": sorted(regions.boundaries[r]),
                "extraction_width": _ew(order, region_labels),
                "extraction_label_width": 1 + omega.for_region(r).max_set_size(),
            }
        )
    return {
        "roots": sorted(g.roots),
        "tree_like": rr_order.tree_like,
        "region_order_root": rr_order.root,
        "regions": per_region,
    }


# ---------------------------------------------------------------------------
# cycle collapsing (non-tree-like root region orders)


def collapse_cycles(
    instance: Instance,
    g: GeneralizedOrder,
    regions: RootRegions,
    rr_order: RootRegionOrder,
) -> tuple[Instance, GeneralizedOrder, RootRegions, RootRegionOrder]:
    """Merge regions lying on root-region cycles by substituting their induced
    extraction order (virtual super-root) until the order is tree-like."""
    counter = 0
    while not rr_order.tree_like:
        cycle_roots = _find_cycle_roots(g.roots, rr_order.edges)
        if not cycle_roots:
            raise RegionError("non-tree-like order without a cycle; cannot collapse")
        super_root = f"{SUPER_ROOT}{counter}"
        counter += 1
        virtual = [(super_root, r) for r in sorted(cycle_roots)]
        instance = _augment_instance(instance, super_root, virtual)
        g = GeneralizedOrder(
            nodes=tuple(sorted(set(g.nodes) | {super_root})),
            edges=tuple(sorted(set(g.edges) | set(virtual))),
            reversed_edges=g.reversed_edges,
        )
        regions = partition_root_regions(g)
        new_root = rr_order.root if rr_order.root not in cycle_roots else super_root
        rr_order = root_region_order(g, regions, new_root)
    return instance, g, regions, rr_order


def _find_cycle_roots(roots: Sequence[str], edges: Sequence[Edge]) -> set[str]:
    """Roots on some undirected cycle of the region adjacency (via spanning
    tree + fundamental cycle of the first extra edge)."""
    parent = {r: r for r in roots}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    tree_adj: dict[str, list[str]] = {r: [] for r in roots}
    extra: Optional[Edge] = None
    for (a, b) in sorted(edges):
        ra, rb = find(a), find(b)
        if ra == rb:
            extra = (a, b)
            break
        parent[ra] = rb
        tree_adj[a].append(b)
        tree_adj[b].append(a)
    if extra is None:
        return set()
    # path between the endpoints of the extra edge inside the tree
    a, b = extra
    prev = {a: a}
    queue = deque([a])
    while queue:
        x = queue.popleft()
        if x == b:
            break
        for y in sorted(tree_adj[x]):
            if y not in prev:
                prev[y] = x
                queue.append(y)
    path = {b}
    x = b
    while x != a:
        x = prev[x]
        path.add(x)
    return path


# ---------------------------------------------------------------------------
# two-stage decomposition: per-region walks plus stitching


def decompose_multiroot(
    instance: Instance,
    g: GeneralizedOrder,
    regions: RootRegions,
    rr_order: RootRegionOrder,
    omega: MultiRootOrdering,
    solution: TMapping[str, float],
    labels: Optional[EdgeLabelAssignment] = None,
) -> ConvexCombination:
    """Stage 1: decompose each region on a private copy of the solution.
    Stage 2: stitch region mappings along the root region order, matching on
    incoming boundaries, repeatedly taking the minimum remaining value."""
    if not rr_order.tree_like:
        raise DecompositionError("root region extraction order is not tree-like")
    if labels is None:
        labels = multiroot_confluence_labels(g, regions)

    stores: dict[str, list[list]] = {}
    boundary_index: dict[str, dict[tuple, list[list]]] = {}
    for r in sorted(g.roots):
        spec = RegionSpec(view=regions.subgraph(g, r), omega=omega.for_region(r), tag=r)
        state = DecompositionState(values=dict(solution))
        combo = decompose_rip(instance, spec, labels, state)
        entries = [[f, m] for (f, m) in combo.entries]
        stores[r] = entries
        index: dict[tuple, list[list]] = {}
        key_nodes = sorted(rr_order.incoming_boundary[r])
        for entry in entries:
            key = tuple(entry[1].node_map[b] for b in key_nodes)
            index.setdefault(key, []).append(entry)
        boundary_index[r] = index

    eps = 1e-9
    stop = 1e-8
    out_adj: dict[str, list[str]] = {r: [] for r in g.roots}
    for (a, b) in rr_order.edges:
        out_adj[a].append(b)

    entries_out: list[tuple[float, MappingResult]] = []
    x = 1.0
    guard = sum(len(v) for v in stores.values()) + 2
    while x > stop:
        chosen: dict[str, list] = {}
        node_map: dict[str, str] = {}
        edge_map: dict[Edge, tuple[Edge, ...]] = {}
        f_min = x
        queue = deque([rr_order.root])
        while queue:
            r = queue.popleft()
            key_nodes = sorted(rr_order.incoming_boundary[r])
            key = tuple(node_map[b] for b in key_nodes)
            cands = [
                entry
                for entry in boundary_index[r].get(key, [])
                if entry[0] > eps
            ]
            if not cands:
                raise DecompositionError(
                    f"stitching failed for region {r!r} at boundary "
                    f"{dict(zip(key_nodes, key))}"
                )
            best = min(cands, key=lambda ent: (-ent[0], ent[1].canonical()))
            chosen[r] = best
            f_min = min(f_min, best[0])
            m_r = best[1]
            for i, u in m_r.node_map.items():
                if i in node_map and node_map[i] != u:
                    raise DecompositionError(
                        f"regions disagree on node {i!r}: {node_map[i]!r} vs {u!r}"
                    )
                node_map[i] = u
            edge_map.update(m_r.edge_map)
            for r2 in sorted(out_adj[r]):
                queue.append(r2)
        for r, entry in chosen.items():
            entry[0] -= f_min
        entries_out.append((f_min, MappingResult(node_map=node_map, edge_map=edge_map)))
        x -= f_min
        if x <= eps:
            x = 0.0
        if len(entries_out) > guard:
            raise DecompositionError("stitching iteration bound exceeded")
    if entries_out and 0.0 < x <= stop:
        k = max(range(len(entries_out)), key=lambda n: entries_out[n][0])
        entries_out[k] = (entries_out[k][0] + x, entries_out[k][1])
    return ConvexCombination(entries=tuple(entries_out))
