"""Hypergraph machinery and extraction label set orderings.

Join trees are built as maximum spanning trees of the intersection graph and
verified against the definition; a set family admits one exactly when it is
alpha-acyclic, which is also when a running intersection ordering exists.
Label set orderings replace the base algorithm's disjoint edge bags and allow
overlap governed by the running intersection property.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping as TMapping, Optional, Sequence

from .errors import OrderingError
from .extraction import (
    EdgeLabelAssignment,
    ExtractionOrder,
    incoming_label_set,
)
from .instance import Edge

LabelSet = frozenset[str]


def _key(s: LabelSet) -> tuple[str, ...]:
    return tuple(sorted(s))


@dataclass(frozen=True)
class SetFamily:
    """Ordered list of node sets; duplicates allowed, deduplicated on demand."""

    sets: tuple[LabelSet, ...]

    @staticmethod
    def of(sets: Iterable[Iterable[str]]) -> "SetFamily":
        return SetFamily(sets=tuple(frozenset(s) for s in sets))

    def deduplicated(self) -> tuple[LabelSet, ...]:
        out: list[LabelSet] = []
        seen: set[LabelSet] = set()
        for s in self.sets:
            if s not in seen:
                seen.add(s)
                out.append(s)
        return tuple(out)

    def reduction(self) -> tuple[LabelSet, ...]:
        """Inclusion-wise maximal distinct sets."""
        dedup = self.deduplicated()
        return tuple(
            s for s in dedup if not any(s < t for t in dedup)
        )


@dataclass(frozen=True)
class JoinTree:
    """Tree over a deduplicated set family with the join-tree edge labeling."""

    nodes: tuple[LabelSet, ...]
    edges: tuple[tuple[LabelSet, LabelSet], ...]

    def neighbors(self, s: LabelSet) -> list[LabelSet]:
        out = []
        for (a, b) in self.edges:
            if a == s:
                out.append(b)
            elif b == s:
                out.append(a)
        return sorted(out, key=_key)


def _verify_join_tree(nodes: Sequence[LabelSet], edges: Sequence[tuple[LabelSet, LabelSet]]) -> bool:
    """Exhaustively check the path-labeling property over all node pairs."""
    index = {s: n for n, s in enumerate(nodes)}
    adj: dict[int, list[int]] = {n: [] for n in range(len(nodes))}
    for (a, b) in edges:
        adj[index[a]].append(index[b])
        adj[index[b]].append(index[a])
    for i in range(len(nodes)):
        # BFS tree from i to recover unique paths
        parent = {i: -1}
        queue = [i]
        while queue:
            x = queue.pop()
            for y in adj[x]:
                if y not in parent:
                    parent[y] = x
                    queue.append(y)
        for k in range(len(nodes)):
            if k == i or k not in parent:
                if k != i and k not in parent:
                    return False  # not connected
                continue
            need = nodes[i] & nodes[k]
            x = k
            while parent[x] != -1:
                p = parent[x]
                if not need <= (nodes[x] & nodes[p]):
                    return False
                x = p
    return True


def join_tree(family: SetFamily) -> Optional[JoinTree]:
    """Maximum spanning tree of the intersection graph, verified; None if the
    family is alpha-cyclic (no join tree exists)."""
    sets = family.deduplicated()
    if not sets:
        return JoinTree(nodes=(), edges=())
    if len(sets) == 1:
        return JoinTree(nodes=sets, edges=())
    order = sorted(sets, key=_key)
    # Kruskal on weights |S & T|, including zero-weight pairs so disconnected
    # intersection graphs still yield a spanning tree (empty overlaps are
    # trivially consistent with the join-tree property).
    cands = []
    for a in range(len(order)):
        for b in range(a + 1, len(order)):
            w = len(order[a] & order[b])
            cands.append((-w, _key(order[a]), _key(order[b]), a, b))
    cands.sort()
    parent = list(range(len(order)))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    chosen: list[tuple[LabelSet, LabelSet]] = []
    for (_, _, _, a, b) in cands:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
            chosen.append((order[a], order[b]))
            if len(chosen) == len(order) - 1:
                break
    if not _verify_join_tree(order, chosen):
        return None
    return JoinTree(nodes=tuple(order), edges=tuple(chosen))


def preorder_traversal(tree: JoinTree, start: LabelSet) -> tuple[LabelSet, ...]:
    """Depth-first preorder from `start`, children in deterministic order."""
    seen = {start}
    out: list[LabelSet] = []
    stack = [start]
    while stack:
        x = stack.pop()
        out.append(x)
        for y in reversed(tree.neighbors(x)):
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return tuple(out)


def is_running_intersection_ordering(ordering: Sequence[LabelSet]) -> bool:
    for a in range(1, len(ordering)):
        prev_union: set[str] = set()
        for b in range(a):
            prev_union |= ordering[b]
        overlap = ordering[a] & prev_union
        if overlap and not any(overlap <= ordering[b] for b in range(a)):
            return False
    return True


def running_intersection_ordering(
    family: SetFamily, start: Optional[Iterable[str]] = None
) -> Optional[tuple[LabelSet, ...]]:
    """Preorder of a join tree beginning at `start` (any root when None);
    None exactly when no join tree exists."""
    tree = join_tree(family)
    if tree is None:
        return None
    if not tree.nodes:
        return ()
    if start is not None:
        s = frozenset(start)
        if s not in set(tree.nodes):
            raise OrderingError(f"start set {sorted(s)} not in family")
    else:
        s = tree.nodes[0]
    return preorder_traversal(tree, s)


def predecessor_sets(ordering: Sequence[LabelSet]) -> tuple[LabelSet, ...]:
    """L^p_a = S_a intersected with the union of its predecessors."""
    out: list[LabelSet] = []
    acc: set[str] = set()
    for s in ordering:
        out.append(frozenset(s & acc))
        acc |= s
    return tuple(out)


def predecessor_indices(ordering: Sequence[LabelSet]) -> tuple[int, ...]:
    """pi(a): first index whose set contains L^p_a; a itself when L^p_a empty.

    Indices are 0-based here; the canonical variable names use 1-based layers.
    """
    preds = predecessor_sets(ordering)
    out = []
    for a, lp in enumerate(preds):
        if not lp:
            out.append(a)
            continue
        for b in range(a + 1):
            if lp <= ordering[b]:
                out.append(b)
                break
    return tuple(out)


@dataclass(frozen=True)
class LabelSetOrdering:
    """Per-node running intersection orderings with representatives."""

    sequences: TMapping[str, tuple[LabelSet, ...]]

    def omega(self, i: str) -> tuple[LabelSet, ...]:
        return self.sequences[i]

    def representative_index(self, order: ExtractionOrder, labels: EdgeLabelAssignment, e: Edge) -> int:
        """0-based index of the first ordering entry containing labels(e)."""
        i = e[0]
        ls = labels.of(e)
        for a, s in enumerate(self.sequences[i]):
            if ls <= s:
                return a
        raise OrderingError(f"no representative label set for edge {e} at node {i!r}")

    def max_set_size(self) -> int:
        best = 0
        for seq in self.sequences.values():
            for s in seq:
                best = max(best, len(s))
        return best


@dataclass(frozen=True)
class EdgeBags:
    """Per-node finest partition of out-edges into label-overlap components."""

    bags: TMapping[str, tuple[tuple[tuple[Edge, ...], LabelSet], ...]]

    def of(self, i: str) -> tuple[tuple[tuple[Edge, ...], LabelSet], ...]:
        return self.bags.get(i, ())


@dataclass(frozen=True)
class OrderingCheckReport:
    ok: bool
    failures: tuple[str, ...]


def edge_bags_for_node(
    order: ExtractionOrder, labels: EdgeLabelAssignment, i: str
) -> tuple[tuple[tuple[Edge, ...], LabelSet], ...]:
    """Union-find over out-edges merging any two with intersecting label sets."""
    out = list(order.out_edges.get(i, ()))
    parent = {e: e for e in out}

    def find(e: Edge) -> Edge:
        while parent[e] != e:
            parent[e] = parent[parent[e]]
            e = parent[e]
        return e

    for a in range(len(out)):
        for b in range(a + 1, len(out)):
            if labels.of(out[a]) & labels.of(out[b]):
                ra, rb = find(out[a]), find(out[b])
                if ra != rb:
                    parent[ra] = rb
    groups: dict[Edge, list[Edge]] = {}
    for e in out:
        groups.setdefault(find(e), []).append(e)
    bags = []
    for g in groups.values():
        label_union: frozenset[str] = frozenset()
        for e in g:
            label_union |= labels.of(e)
        bags.append((tuple(sorted(g)), label_union))
    bags.sort(key=lambda item: (_key(item[1]), item[0]))
    return tuple(bags)


def edge_bags(order: ExtractionOrder, labels: EdgeLabelAssignment) -> EdgeBags:
    return EdgeBags(bags={i: edge_bags_for_node(order, labels, i) for i in order.nodes})


def bag_label_set_ordering(
    order: ExtractionOrder, labels: EdgeLabelAssignment
) -> LabelSetOrdering:
    """Incoming label set first, then the bag label sets (deduplicated).

    This is the ordering realizing the base algorithm inside the adapted one;
    empty bag sets are dropped because the leading entry already represents
    every unlabeled edge.
    """
    seqs: dict[str, tuple[LabelSet, ...]] = {}
    for i in order.nodes:
        inc = incoming_label_set(order, labels, i)
        seq: list[LabelSet] = [inc]
        for (_, bag_labels) in edge_bags_for_node(order, labels, i):
            if bag_labels and bag_labels not in seq:
                seq.append(bag_labels)
        seqs[i] = tuple(seq)
    return LabelSetOrdering(sequences=seqs)


def _auto_sequence_for_node(
    order: ExtractionOrder, labels: EdgeLabelAssignment, i: str
) -> tuple[LabelSet, ...]:
    inc = incoming_label_set(order, labels, i)
    out_sets = []
    seen: set[LabelSet] = set()
    for e in order.out_edges.get(i, ()):
        s = labels.of(e)
        if s and s not in seen:
            seen.add(s)
            out_sets.append(s)
    # Drop sets already represented by the incoming set or another out-set.
    maximal = [
        s
        for s in out_sets
        if not (s <= inc) and not any(s < t for t in out_sets)
    ]
    family = list(dict.fromkeys(([inc] if inc else []) + maximal))

    while True:
        tree = join_tree(SetFamily(sets=tuple(family)))
        if tree is not None:
            break
        # alpha-cyclic: merge the two overlapping sets with the smallest union
        best = None
        for a in range(len(family)):
            for b in range(a + 1, len(family)):
                if family[a] & family[b]:
                    union = family[a] | family[b]
                    cand = (len(union), _key(union), a, b)
                    if best is None or cand < best:
                        best = cand
        assert best is not None, "cyclic family without overlaps is impossible"
        _, _, a, b = best[0], best[1], best[2], best[3]
        union = family[a] | family[b]
        family = [s for n, s in enumerate(family) if n not in (a, b) and not (s <= union)]
        family.append(union)
        family.sort(key=_key)

    if not family:
        return (inc,)
    tree = join_tree(SetFamily(sets=tuple(family)))
    assert tree is not None
    if inc and inc in set(tree.nodes):
        start = inc
    else:
        containing = sorted((s for s in tree.nodes if inc <= s), key=lambda s: (len(s), _key(s)))
        start = containing[0] if containing else tree.nodes[0]
    seq = list(preorder_traversal(tree, start))
    if not seq or seq[0] != inc:
        seq = [inc] + [s for s in seq if s != inc]
    return tuple(seq)


def auto_label_set_ordering(
    order: ExtractionOrder, labels: EdgeLabelAssignment
) -> LabelSetOrdering:
    """Running-intersection ordering of each node's incident label sets.

    Alpha-cyclic families fall back to greedy merging; if the merged result
    would ever be wider than that node's bag ordering, the bag ordering is used
    instead, so the auto width never exceeds the extraction width.
    """
    bag = bag_label_set_ordering(order, labels)
    seqs: dict[str, tuple[LabelSet, ...]] = {}
    for i in order.nodes:
        cand = _auto_sequence_for_node(order, labels, i)
        bag_seq = bag.omega(i)
        if max((len(s) for s in cand), default=0) > max((len(s) for s in bag_seq), default=0):
            cand = bag_seq
        seqs[i] = cand
    return LabelSetOrdering(sequences=seqs)


def validate_ordering(
    order: ExtractionOrder, labels: EdgeLabelAssignment, omega: LabelSetOrdering
) -> OrderingCheckReport:
    """Check the three defining properties per node; first violation each."""
    failures: list[str] = []
    for i in order.nodes:
        try:
            seq = omega.omega(i)
        except KeyError:
            failures.append(f"{i}: no ordering")
            continue
        if not is_running_intersection_ordering(seq):
            failures.append(f"{i}: property 1 violated (not a running intersection ordering)")
            continue
        inc = incoming_label_set(order, labels, i)
        if not seq or seq[0] != inc:
            failures.append(f"{i}: property 2 violated (first set != incoming label set)")
            continue
        for e in order.out_edges.get(i, ()):
            if not any(labels.of(e) <= s for s in seq):
                failures.append(f"{i}: property 3 violated (no representative for edge {e})")
                break
    return OrderingCheckReport(ok=not failures, failures=tuple(failures))


def extraction_width(order: ExtractionOrder, labels: EdgeLabelAssignment) -> int:
    """1 + size of the largest bag label set."""
    best = 0
    for i in order.nodes:
        for (_, bag_labels) in edge_bags_for_node(order, labels, i):
            best = max(best, len(bag_labels))
    return 1 + best


def extraction_label_width(order: ExtractionOrder, omega: LabelSetOrdering) -> int:
    """1 + size of the largest label set in the ordering."""
    return 1 + omega.max_set_size()


def label_set_graph(family: SetFamily) -> tuple[tuple[str, ...], tuple[tuple[str, str], ...]]:
    """Primal graph of the hypergraph: one clique per set."""
    nodes = sorted({v for s in family.sets for v in s})
    edges: set[tuple[str, str]] = set()
    for s in family.sets:
        elems = sorted(s)
        for a in range(len(elems)):
            for b in range(a + 1, len(elems)):
                edges.add((elems[a], elems[b]))
    return tuple(nodes), tuple(sorted(edges))


def hypergraph_extraction_order(family: SetFamily) -> ExtractionOrder:
    """Constructive reduction: an extraction order whose root out-edge
    confluence labels reproduce the family (inclusion-maximal subfamily).

    Nodes: a root, one representative per set, and the label nodes. Edges:
    root->representative, representative->label, plus root->label for labels
    occurring in exactly one set (to force a confluence ending there).
    """
    sets = list(family.sets)
    if not sets:
        raise OrderingError("empty set family")
    if any(not s for s in sets):
        raise OrderingError("empty set in family")
    label_nodes = sorted({v for s in sets for v in s})
    root = "root"
    rep_names = [f"set_{n}" for n in range(len(sets))]
    clash = set(label_nodes) & (set(rep_names) | {root})
    if clash:
        raise OrderingError(f"label identifiers collide with construction names: {sorted(clash)}")
    edges: list[Edge] = []
    for n, s in enumerate(sets):
        edges.append((root, rep_names[n]))
        for l in sorted(s):
            edges.append((rep_names[n], l))
    occurrences = {l: sum(1 for s in sets if l in s) for l in label_nodes}
    for l in label_nodes:
        if occurrences[l] == 1:
            edges.append((root, l))
    nodes = tuple(sorted([root] + rep_names + label_nodes))
    return ExtractionOrder(
        nodes=nodes, edges=tuple(sorted(edges)), root=root, reversed_edges=frozenset()
    )


def width_report(
    order: ExtractionOrder,
    labels: EdgeLabelAssignment,
    omega: LabelSetOrdering,
) -> dict:
    """CLI-facing width report for one rooted order."""
    per_node = []
    for i in order.nodes:
        bags = edge_bags_for_node(order, labels, i)
        per_node.append(
            {
                "node": i,
                "bag_label_sets": [sorted(bl) for (_, bl) in bags],
                "ordering": [sorted(s) for s in omega.omega(i)],
            }
        )
    return {
        "root": order.root,
        "extraction_width": extraction_width(order, labels),
        "extraction_label_width": extraction_label_width(order, omega),
        "per_node": per_node,
    }
