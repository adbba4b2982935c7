"""Extraction orders and confluence-based edge label assignments.

An extraction order is a rooted acyclic orientation of the request. Confluence
edge labels mark each oriented edge with the end nodes of all confluences (two
interior-disjoint directed paths sharing start and end) running through it;
they drive the duplication of LP subformulations downstream.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping as TMapping, Optional

from .errors import OrientationError
from .instance import Edge, RequestGraph


@dataclass(frozen=True)
class ExtractionOrder:
    """Rooted acyclic orientation of a request topology.

    `reversed_edges` holds oriented edges whose original request direction is
    flipped; `orig_edge` recovers the request edge behind an oriented edge.
    """

    nodes: tuple[str, ...]
    edges: tuple[Edge, ...]
    root: str
    reversed_edges: frozenset[Edge]

    def __post_init__(self):
        if self.root not in set(self.nodes):
            raise OrientationError(f"root {self.root!r} not a node")
        if topological_order(self.nodes, self.edges) is None:
            raise OrientationError("orientation contains a directed cycle")
        reach = reachable_from(self.root, self.out_edges)
        if reach != set(self.nodes):
            missing = sorted(set(self.nodes) - reach)
            raise OrientationError(f"nodes unreachable from root: {missing}")

    def orig_edge(self, e: Edge) -> Edge:
        return (e[1], e[0]) if e in self.reversed_edges else e

    @cached_property
    def out_edges(self) -> dict[str, tuple[Edge, ...]]:
        adj: dict[str, list[Edge]] = {i: [] for i in self.nodes}
        for e in self.edges:
            adj[e[0]].append(e)
        return {i: tuple(sorted(es)) for i, es in adj.items()}

    @cached_property
    def in_edges(self) -> dict[str, tuple[Edge, ...]]:
        adj: dict[str, list[Edge]] = {i: [] for i in self.nodes}
        for e in self.edges:
            adj[e[1]].append(e)
        return {i: tuple(sorted(es)) for i, es in adj.items()}

    def matches_request(self, request: RequestGraph) -> bool:
        mine = {frozenset(e) for e in self.edges}
        theirs = {frozenset(e) for e in request.edges}
        return mine == theirs and set(self.nodes) == set(request.nodes)


@dataclass(frozen=True)
class EdgeLabelAssignment:
    """Per-oriented-edge label node sets."""

    labels: TMapping[Edge, frozenset[str]]

    def of(self, e: Edge) -> frozenset[str]:
        return self.labels.get(e, frozenset())

    def label_nodes(self) -> frozenset[str]:
        out: set[str] = set()
        for s in self.labels.values():
            out |= s
        return frozenset(out)


@dataclass(frozen=True)
class Confluence:
    """Two interior-disjoint directed paths sharing start and end node."""

    start: str
    end: str
    path_a: tuple[Edge, ...]
    path_b: tuple[Edge, ...]

    def __post_init__(self):
        for path in (self.path_a, self.path_b):
            if not path:
                raise OrientationError("confluence branch must contain an edge")
            if path[0][0] != self.start or path[-1][1] != self.end:
                raise OrientationError(
                    f"branch {path} does not run {self.start!r} -> {self.end!r}"
                )
            for (a, b) in zip(path, path[1:]):
                if a[1] != b[0]:
                    raise OrientationError(f"branch {path} is not a path")
        if self._interior(self.path_a) & self._interior(self.path_b):
            raise OrientationError("confluence branches share an interior node")

    @staticmethod
    def _interior(path: tuple[Edge, ...]) -> set[str]:
        return {v for e in path[:-1] for v in (e[1],)}


@dataclass(frozen=True)
class LabelCheckReport:
    ok: bool
    failures: tuple[str, ...]
    properties: TMapping[str, bool]


def topological_order(nodes: Iterable[str], edges: Iterable[Edge]) -> Optional[list[str]]:
    """Deterministic topological order, or None if cyclic."""
    nodes = sorted(nodes)
    indeg = {i: 0 for i in nodes}
    adj: dict[str, list[str]] = {i: [] for i in nodes}
    for (i, j) in edges:
        indeg[j] += 1
        adj[i].append(j)
    ready = sorted(i for i in nodes if indeg[i] == 0)
    order: list[str] = []
    queue = deque(ready)
    while queue:
        x = queue.popleft()
        order.append(x)
        newly = []
        for y in adj[x]:
            indeg[y] -= 1
            if indeg[y] == 0:
                newly.append(y)
        for y in sorted(newly):
            queue.append(y)
    return order if len(order) == len(nodes) else None


def reachable_from(start: str, out_edges: TMapping[str, tuple[Edge, ...]]) -> set[str]:
    seen = {start}
    stack = [start]
    while stack:
        x = stack.pop()
        for (_, y) in out_edges.get(x, ()):
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return seen


def orient_bfs(request: RequestGraph, root: str) -> ExtractionOrder:
    """Orient every undirected request edge away from its first-discovered
    endpoint in a lexicographic BFS of the undirected topology."""
    if root not in set(request.nodes):
        raise OrientationError(f"root {root!r} is not a request node")
    adj = request.undirected_adjacency
    disc = {root: 0}
    queue = deque([root])
    counter = 1
    while queue:
        x = queue.popleft()
        for y in adj[x]:
            if y not in disc:
                disc[y] = counter
                counter += 1
                queue.append(y)
    if len(disc) != len(request.nodes):
        raise OrientationError("request is disconnected")
    oriented: list[Edge] = []
    rev: set[Edge] = set()
    for (i, j) in request.edges:
        if disc[i] < disc[j]:
            oriented.append((i, j))
        else:
            oriented.append((j, i))
            rev.add((j, i))
    return ExtractionOrder(
        nodes=tuple(sorted(request.nodes)),
        edges=tuple(sorted(oriented)),
        root=root,
        reversed_edges=frozenset(rev),
    )


def _closure(nodes: tuple[str, ...], out_edges) -> dict[str, set[str]]:
    """reach[x] = nodes reachable from x (excluding x unless on a cycle)."""
    reach: dict[str, set[str]] = {}
    order = topological_order(nodes, [e for es in out_edges.values() for e in es])
    assert order is not None
    for x in reversed(order):
        acc: set[str] = set()
        for (_, y) in out_edges.get(x, ()):
            acc.add(y)
            acc |= reach[y]
        reach[x] = acc
    return reach


def _two_disjoint_paths_with_edge(order: ExtractionOrder, s: str, j: str, e: Edge) -> bool:
    """True iff two interior-disjoint s->j paths exist with `e` on one of them.

    Encoded as a max-flow of value 3 on the node-split graph: one unit from the
    head of `e` to j, one unit from s terminating at the tail of `e`, and one
    unit s->j; node capacities 1 except s and j (2). Acyclicity rules out any
    spurious decomposition.
    """
    x, y = e
    cap: dict[tuple[str, str], float] = {}
    nodes = order.nodes

    def node_in(v):
        return ("in", v)

    def node_out(v):
        return ("out", v)

    for v in nodes:
        cap[(node_in(v), node_out(v))] = 2 if v in (s, j) else 1
    for arc in order.edges:
        if arc == e:
            continue
        (u, v) = arc
        cap[(node_out(u), node_in(v))] = 1
    src, snk = ("S", ""), ("T", "")
    cap[(src, node_in(s))] = 2
    cap[(src, node_in(y))] = cap.get((src, node_in(y)), 0) + 1
    cap[(node_out(x), snk)] = cap.get((node_out(x), snk), 0) + 1
    cap[(node_out(j), snk)] = cap.get((node_out(j), snk), 0) + 2

    adj: dict[tuple, list[tuple]] = {}
    flow: dict[tuple[tuple, tuple], float] = {}
    for (a, b) in list(cap):
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
        flow[(a, b)] = 0.0
        flow.setdefault((b, a), 0.0)
        cap.setdefault((b, a), 0)

    total = 0
    while total < 3:
        parent: dict[tuple, tuple] = {src: src}
        q = deque([src])
        while q and snk not in parent:
            a = q.popleft()
            for b in adj.get(a, ()):
                if b not in parent and cap.get((a, b), 0) - flow[(a, b)] > 0:
                    parent[b] = a
                    q.append(b)
        if snk not in parent:
            break
        b = snk
        while b != src:
            a = parent[b]
            flow[(a, b)] += 1
            flow[(b, a)] -= 1
            b = a
        total += 1
    return total == 3


def confluence_edge_labels(order: ExtractionOrder) -> EdgeLabelAssignment:
    """Label each oriented edge with the end nodes of all confluences through it.

    Only nodes with at least two in-edges can end a confluence; for each such
    node j and each candidate edge, existence of a confluence through the edge
    is decided exactly by a forced-edge disjoint-paths flow check over all
    possible start nodes.
    """
    reach = _closure(order.nodes, order.out_edges)
    ends = [j for j in order.nodes if len(order.in_edges[j]) >= 2]
    labels: dict[Edge, set[str]] = {e: set() for e in order.edges}
    for j in sorted(ends):
        for e in order.edges:
            x, y = e
            if y != j and j not in reach[y]:
                continue
            if x == j:
                continue
            starts = sorted(v for v in order.nodes if x == v or x in reach[v])
            for s in starts:
                if s == j:
                    continue
                if _two_disjoint_paths_with_edge(order, s, j, e):
                    labels[e].add(j)
                    break
    return EdgeLabelAssignment(labels={e: frozenset(v) for e, v in labels.items()})


def incoming_label_set(order: ExtractionOrder, labels: EdgeLabelAssignment, i: str) -> frozenset[str]:
    """The (shared) label set of i's in-edges; empty for the root."""
    ins = order.in_edges[i]
    if not ins:
        return frozenset()
    return labels.of(ins[0])


def label_induced_subgraph(
    order: ExtractionOrder, labels: EdgeLabelAssignment, k: str
) -> tuple[tuple[str, ...], tuple[Edge, ...], Optional[str]]:
    """Smallest subgraph holding every edge labeled k; root if one exists."""
    edges = tuple(sorted(e for e in order.edges if k in labels.of(e)))
    if not edges:
        raise OrientationError(f"{k!r} never occurs as a label")
    nodes = tuple(sorted({v for e in edges for v in e}))
    indeg = {v: 0 for v in nodes}
    sub_out: dict[str, list[Edge]] = {v: [] for v in nodes}
    for (a, b) in edges:
        indeg[b] += 1
        sub_out[a].append((a, b))
    sources = [v for v in nodes if indeg[v] == 0]
    root: Optional[str] = None
    if len(sources) == 1:
        r = sources[0]
        if reachable_from(r, {v: tuple(es) for v, es in sub_out.items()}) == set(nodes):
            root = r
    return nodes, edges, root


def check_decomposable_labels(
    order: ExtractionOrder, labels: EdgeLabelAssignment
) -> LabelCheckReport:
    """Verify the five decomposability properties plus label path continuity."""
    failures: list[str] = []
    props: dict[str, bool] = {}

    confl = confluence_edge_labels(order)
    p1 = all(confl.of(e) <= labels.of(e) for e in order.edges)
    props["extends_confluence_labels"] = p1
    if not p1:
        for e in order.edges:
            missing = confl.of(e) - labels.of(e)
            if missing:
                failures.append(f"property 1: edge {e} misses confluence labels {sorted(missing)}")

    label_nodes = sorted(labels.label_nodes())
    p2 = p3 = True
    for k in label_nodes:
        nodes, edges, root = label_induced_subgraph(order, labels, k)
        if root is None:
            p2 = False
            failures.append(f"property 2: label-induced subgraph for {k!r} is not rooted")
        if k not in set(nodes):
            p3 = False
            failures.append(f"property 3: {k!r} not contained in its label-induced subgraph")
    props["label_subgraphs_rooted"] = p2
    props["label_node_contained"] = p3

    p4 = True
    for i in order.nodes:
        ins = order.in_edges[i]
        sets = {labels.of(e) for e in ins}
        if len(sets) > 1:
            p4 = False
            failures.append(f"property 4: in-edges of {i!r} carry different label sets")
    props["incoming_labels_equal"] = p4

    p5 = True
    for k in label_nodes:
        for e in order.out_edges.get(k, ()):
            if k in labels.of(e):
                p5 = False
                failures.append(f"property 5: out-edge {e} of {k!r} labeled with {k!r}")
    props["no_self_label_on_out_edges"] = p5

    # Label path continuity: every edge situated on a path from a node of the
    # label-induced subgraph towards k must itself carry k.
    continuity = True
    if p2 and p3:
        reach = _closure(order.nodes, order.out_edges)
        for k in label_nodes:
            nodes, _, _ = label_induced_subgraph(order, labels, k)
            for i in nodes:
                if i == k:
                    continue
                for e in order.edges:
                    x, y = e
                    from_i = x == i or x in reach[i]
                    to_k = y == k or k in reach[y]
                    if from_i and to_k and k not in labels.of(e):
                        continuity = False
                        failures.append(
                            f"continuity: edge {e} on a path {i!r}->{k!r} lacks label {k!r}"
                        )
                        break
                else:
                    continue
                break
    props["label_path_continuity"] = continuity

    return LabelCheckReport(ok=not failures, failures=tuple(failures), properties=props)


def order_to_document(order: ExtractionOrder, labels: Optional[EdgeLabelAssignment] = None) -> dict:
    """Serialize an extraction order (JSON schema of the external interface)."""
    return {
        "root": order.root,
        "edges": [
            {
                "tail": i,
                "head": j,
                "reversed": (i, j) in order.reversed_edges,
                "labels": sorted(labels.of((i, j))) if labels else [],
            }
            for (i, j) in order.edges
        ],
    }


def order_from_document(doc: dict, request: Optional[RequestGraph] = None) -> ExtractionOrder:
    """Parse the JSON orientation schema back into an ExtractionOrder."""
    try:
        root = doc["root"]
        edges = [(ed["tail"], ed["head"]) for ed in doc["edges"]]
        rev = frozenset(
            (ed["tail"], ed["head"]) for ed in doc["edges"] if ed.get("reversed", False)
        )
    except (KeyError, TypeError) as exc:
        raise OrientationError(f"malformed orientation document: {exc}") from exc
    nodes = tuple(sorted({v for e in edges for v in e}))
    order = ExtractionOrder(nodes=nodes, edges=tuple(sorted(edges)), root=root, reversed_edges=rev)
    if request is not None and not order.matches_request(request):
        raise OrientationError("orientation does not match the request topology")
    return order
