"""Decomposition of fractional LP solutions into convex combinations of valid
mappings: the tree/MCF walk and the label-set-ordering walk.

Both follow the same outer loop: pick a root placement with positive value,
grow a mapping along a top-down traversal, subtract the minimum used variable
value everywhere it was used, and repeat until the tracked total hits zero.
The label-set variant additionally fixes label-node placements layer by layer
along each node's running intersection ordering, which is what makes the
extracted mappings agree across confluences.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from typing import Mapping as TMapping, Optional, Sequence

from .errors import DecompositionError, MappingConflictError
from .extraction import EdgeLabelAssignment, ExtractionOrder
from .instance import (
    ConvexCombination,
    Edge,
    Instance,
    MappingResult,
    allocations,
    mapping_cost,
    respects_capacities,
    validate_mapping,
)
from .lp import (
    RegionSpec,
    name_a_edge,
    name_a_edge_sub,
    name_a_node,
    name_a_node_sub,
    name_gamma,
    name_y,
    name_y_sub,
    name_z_sub,
    restrict,
)

EPS = 1e-9


@dataclass
class DecompositionState:
    """Private mutable copy of an LP assignment being consumed.

    `stop` bounds the numerical residue tolerated at the end of a walk;
    anything left below it is folded into the largest extracted entry so the
    returned values sum to exactly one.
    """

    values: dict[str, float]
    x: float = 1.0
    eps: float = EPS
    stop: float = 1e-8

    def get(self, name: str) -> float:
        v = self.values.get(name, 0.0)
        return v if v > self.eps else 0.0

    def subtract(self, names: Sequence[str], f: float) -> None:
        for n in names:
            nv = self.values.get(n, 0.0) - f
            self.values[n] = 0.0 if abs(nv) <= self.eps else nv

    def subtract_amount(self, name: str, amount: float) -> None:
        nv = self.values.get(name, 0.0) - amount
        self.values[name] = 0.0 if abs(nv) <= self.eps else nv


@dataclass(frozen=True)
class VerifyReport:
    ok: bool
    failures: tuple[str, ...]


def _choose_max(cands: list[tuple[float, str]]) -> Optional[str]:
    """Maximum value, lexicographic tie-break; None if empty."""
    best: Optional[tuple[float, str]] = None
    for val, key in cands:
        if best is None or val > best[0] + 1e-15 or (abs(val - best[0]) <= 1e-15 and key < best[1]):
            best = (val, key)
    return best[1] if best else None


def extract_path(
    state: DecompositionState,
    instance: Instance,
    z_name,
    heady_name,
    start: str,
    reversed_edge: bool,
) -> tuple[tuple[Edge, ...], str]:
    """Graph search over arcs with positive flow from (or to) `start`.

    Returns (path, end) where the head node's y-value is positive; the path is
    simple by construction (visited set), so detached flow cycles are ignored.
    For reversed edges the search runs backwards to `start` and the returned
    path still runs in the substrate's forward direction.
    """
    sub = instance.substrate
    seen = {start}
    parent: dict[str, Edge] = {}
    queue = deque([start])
    candidates: list[tuple[float, str]] = []
    if state.get(heady_name(start)) > 0:
        candidates.append((state.get(heady_name(start)), start))
    while queue:
        node = queue.popleft()
        arcs = sub.out_edges[node] if not reversed_edge else sub.in_edges[node]
        for arc in arcs:
            nxt = arc[1] if not reversed_edge else arc[0]
            if nxt in seen or state.get(z_name(arc)) <= 0:
                continue
            seen.add(nxt)
            parent[nxt] = arc
            queue.append(nxt)
            if state.get(heady_name(nxt)) > 0:
                candidates.append((state.get(heady_name(nxt)), nxt))
    end = _choose_max(candidates)
    if end is None:
        raise DecompositionError(
            f"no admissible path from {start!r} (reversed={reversed_edge}); "
            "the assignment violates local connectivity"
        )
    path: list[Edge] = []
    node = end
    while node != start:
        arc = parent[node]
        path.append(arc)
        node = arc[0] if not reversed_edge else arc[1]
    if not reversed_edge:
        path.reverse()
    return tuple(path), end


def _mapping_space_compatible(
    instance: Instance,
    label_set: frozenset[str],
    fixed: TMapping[str, str],
) -> list[dict[str, str]]:
    """Mappings of the label set agreeing with `fixed` on its mapped part."""
    keys = sorted(label_set)
    pools = []
    for k in keys:
        if k in fixed:
            pools.append((fixed[k],))
        else:
            pools.append(instance.substrate.nodes_supporting(instance.request.node_type[k]))
    return [dict(zip(keys, combo)) for combo in itertools.product(*pools)]


def decompose_rip(
    instance: Instance,
    spec: RegionSpec,
    labels: EdgeLabelAssignment,
    state: DecompositionState,
    record_allocations: bool = True,
) -> ConvexCombination:
    """Label-set-ordering decomposition of one rooted (sub)order.

    `spec` carries the rooted view, its ordering, and the gamma namespace tag;
    `state` is consumed in place (callers hand in a private copy).
    """
    view, omega, tag = spec.view, spec.omega, spec.tag
    in_edges = {i: spec.in_edges(i) for i in view.nodes}
    out_edges = {i: spec.out_edges(i) for i in view.nodes}
    entries: list[tuple[float, MappingResult]] = []

    while state.x > state.stop:
        node_map: dict[str, str] = {}
        edge_map: dict[Edge, tuple[Edge, ...]] = {}
        mapped_oriented: set[Edge] = set()
        chosen_gammas: list[str] = []

        root = view.root
        root_pick = _choose_max(
            [
                (state.get(name_y(root, u)), u)
                for u in instance.substrate.nodes_supporting(instance.request.node_type[root])
                if state.get(name_y(root, u)) > 0
            ]
        )
        if root_pick is None:
            raise DecompositionError(
                f"x = {state.x} but no positive root placement for {root!r} remains"
            )
        node_map[root] = root_pick

        queue = deque([root])
        while queue:
            i = queue.popleft()
            u = node_map[i]
            seq = omega.omega(i)
            for a, label_set in enumerate(seq):
                cands = []
                for m_a in _mapping_space_compatible(instance, label_set, node_map):
                    g = state.get(name_gamma(i, u, a + 1, m_a, tag))
                    if g > 0:
                        cands.append((g, _canon(m_a)))
                pick = _choose_max(cands)
                if pick is None:
                    raise DecompositionError(
                        f"no compatible gamma at node {i!r}, layer {a + 1}, "
                        f"label set {sorted(label_set)}"
                    )
                m_a = _decanon(pick)
                chosen_gammas.append(name_gamma(i, u, a + 1, m_a, tag))
                for k, uk in m_a.items():
                    if k not in node_map:
                        node_map[k] = uk
                for e in sorted(out_edges[i]):
                    if _rep_index_of(spec, labels, e) != a:
                        continue
                    orig = view.orig_edge(e)
                    m_e = restrict(node_map, labels.of(e))
                    reversed_edge = orig != e
                    head = e[1]

                    def z_name(arc: Edge, orig=orig, m_e=m_e):
                        return name_z_sub(orig, arc, m_e)

                    def heady_name(v: str, head=head, orig=orig, m_e=m_e):
                        return name_y_sub(head, v, orig, m_e)

                    path, end = extract_path(state, instance, z_name, heady_name, u, reversed_edge)
                    if head in node_map and node_map[head] != end:
                        raise MappingConflictError(head, node_map[head], end)
                    node_map.setdefault(head, end)
                    edge_map[orig] = path
                    mapped_oriented.add(e)
                    if all(f in mapped_oriented for f in in_edges[head]):
                        queue.append(head)

        mapping = MappingResult(node_map=node_map, edge_map=edge_map)
        used: list[str] = []
        for i in view.nodes:
            used.append(name_y(i, node_map[i]))
        for e in view.edges:
            orig = view.orig_edge(e)
            m_e = restrict(node_map, labels.of(e))
            for i in orig:
                used.append(name_y_sub(i, node_map[i], orig, m_e))
            for arc in edge_map[orig]:
                used.append(name_z_sub(orig, arc, m_e))
        used.extend(chosen_gammas)

        f = min(min(state.values.get(n, 0.0) for n in used), state.x)
        if f <= state.eps:
            raise DecompositionError("chosen variables carry no positive value")
        state.subtract(list(dict.fromkeys(used)), f)
        state.x -= f
        if state.x <= state.eps:
            state.x = 0.0
        if record_allocations:
            _subtract_allocations(instance, state, spec, labels, mapping, f)
        entries.append((f, mapping))
        if len(entries) > len(state.values) + 2:
            raise DecompositionError("iteration bound exceeded; values not draining")
    return ConvexCombination(entries=_fold_residue(entries, state))


def _fold_residue(
    entries: list[tuple[float, MappingResult]], state: DecompositionState
) -> tuple[tuple[float, MappingResult], ...]:
    if entries and 0.0 < state.x <= state.stop:
        k = max(range(len(entries)), key=lambda n: entries[n][0])
        entries[k] = (entries[k][0] + state.x, entries[k][1])
        state.x = 0.0
    return tuple(entries)


def _canon(m: TMapping[str, str]) -> str:
    return ",".join(f"{k}:{v}" for k, v in sorted(m.items()))


def _decanon(s: str) -> dict[str, str]:
    if not s:
        return {}
    return dict(pair.split(":", 1) for pair in s.split(","))


def _rep_index_of(spec: RegionSpec, labels: EdgeLabelAssignment, e: Edge) -> int:
    seq = spec.omega.omega(e[0])
    ls = labels.of(e)
    for a, s in enumerate(seq):
        if ls <= s:
            return a
    raise DecompositionError(f"no representative for edge {e}")


def _subtract_allocations(
    instance: Instance,
    state: DecompositionState,
    spec: RegionSpec,
    labels: EdgeLabelAssignment,
    mapping: MappingResult,
    f: float,
) -> None:
    """Drain global allocation variables by f*A(m, .) and each used
    subformulation's allocation variables by its own c_R-weighted share."""
    req = instance.request
    partial = MappingResult(
        node_map={i: mapping.node_map[i] for i in spec.view.nodes},
        edge_map={spec.view.orig_edge(e): mapping.edge_map[spec.view.orig_edge(e)] for e in spec.view.edges},
    )
    for key, amount in _partial_allocations(instance, partial).items():
        if key in instance.substrate.node_capacity:
            state.subtract_amount(name_a_node(*key), f * amount)
        else:
            state.subtract_amount(name_a_edge(*key), f * amount)
    for e in spec.view.edges:
        orig = spec.view.orig_edge(e)
        t, h = orig
        m_e = restrict(mapping.node_map, labels.of(e))
        for i in (t, h):
            tau = req.node_type[i]
            if tau is None:
                continue
            state.subtract_amount(
                name_a_node_sub(mapping.node_map[i], tau, orig, m_e),
                f * req.node_demand.get(i, 0.0),
            )
        dem = req.edge_demand.get(orig, 0.0)
        for arc in mapping.edge_map[orig]:
            state.subtract_amount(name_a_edge_sub(arc, orig, m_e), f * dem)


def _partial_allocations(instance: Instance, m: MappingResult) -> dict[tuple, float]:
    """Allocation of a possibly partial mapping (no validity requirement)."""
    req = instance.request
    out: dict[tuple, float] = {}
    for i, u in m.node_map.items():
        tau = req.node_type.get(i)
        if tau is None:
            continue
        out[(u, tau)] = out.get((u, tau), 0.0) + req.node_demand.get(i, 0.0)
    for e, path in m.edge_map.items():
        for arc in path:
            out[arc] = out.get(arc, 0.0) + req.edge_demand.get(e, 0.0)
    return out


def decompose_adapted(
    instance: Instance,
    order: ExtractionOrder,
    labels: EdgeLabelAssignment,
    omega,
    solution: TMapping[str, float],
) -> ConvexCombination:
    """Algorithm-3 decomposition of a feasible adapted-LP assignment."""
    state = DecompositionState(values=dict(solution))
    return decompose_rip(instance, RegionSpec(view=order, omega=omega), labels, state)


def decompose_mcf(
    instance: Instance,
    order: ExtractionOrder,
    solution: TMapping[str, float],
    require_tree: bool = True,
) -> ConvexCombination:
    """MCF-relaxation decomposition (valid for tree requests).

    With require_tree=False the same naive per-branch path-following runs on
    cyclic requests; it then raises MappingConflictError when the branches
    disagree, which is exactly the non-decomposability phenomenon.
    """
    if require_tree and not instance.request.is_tree():
        raise DecompositionError("request is not a tree; the MCF walk needs one")
    state = DecompositionState(values=dict(solution))
    entries: list[tuple[float, MappingResult]] = []
    in_edges = {i: order.in_edges[i] for i in order.nodes}

    while state.x > state.stop:
        node_map: dict[str, str] = {}
        edge_map: dict[Edge, tuple[Edge, ...]] = {}
        mapped_oriented: set[Edge] = set()
        root = order.root
        root_pick = _choose_max(
            [
                (state.get(name_y(root, u)), u)
                for u in instance.substrate.nodes_supporting(instance.request.node_type[root])
                if state.get(name_y(root, u)) > 0
            ]
        )
        if root_pick is None:
            raise DecompositionError(f"x = {state.x} but no positive root placement remains")
        node_map[root] = root_pick
        queue = deque([root])
        while queue:
            i = queue.popleft()
            for e in sorted(order.out_edges[i]):
                orig = order.orig_edge(e)
                reversed_edge = orig != e
                head = e[1]

                def z_name(arc: Edge, orig=orig):
                    return name_z_sub(orig, arc, {})

                def heady_name(v: str, head=head):
                    return name_y(head, v)

                path, end = extract_path(
                    state, instance, z_name, heady_name, node_map[i], reversed_edge
                )
                if head in node_map and node_map[head] != end:
                    raise MappingConflictError(head, node_map[head], end)
                node_map.setdefault(head, end)
                edge_map[orig] = path
                mapped_oriented.add(e)
                if all(f in mapped_oriented for f in in_edges[head]):
                    queue.append(head)

        mapping = MappingResult(node_map=node_map, edge_map=edge_map)
        used = [name_y(i, node_map[i]) for i in order.nodes]
        for e in order.edges:
            orig = order.orig_edge(e)
            for arc in edge_map[orig]:
                used.append(name_z_sub(orig, arc, {}))
        f = min(min(state.values.get(n, 0.0) for n in used), state.x)
        if f <= state.eps:
            raise DecompositionError("chosen variables carry no positive value")
        state.subtract(list(dict.fromkeys(used)), f)
        state.x -= f
        if state.x <= state.eps:
            state.x = 0.0
        for key, amount in allocations(instance, mapping).items():
            if key in instance.substrate.node_capacity:
                state.subtract_amount(name_a_node(*key), f * amount)
            else:
                state.subtract_amount(name_a_edge(*key), f * amount)
        entries.append((f, mapping))
        if len(entries) > len(state.values) + 2:
            raise DecompositionError("iteration bound exceeded; values not draining")
    return ConvexCombination(entries=_fold_residue(entries, state))


def verify_convex_combination(
    instance: Instance,
    combo: ConvexCombination,
    solution: Optional[TMapping[str, float]] = None,
    tolerance: float = 1e-7,
) -> VerifyReport:
    """Completeness, validity, and (when the originating solution is given)
    the per-resource allocation bound sum_k f_k A(m_k, x) <= a^x."""
    failures: list[str] = []
    total = combo.total()
    if abs(total - 1.0) > tolerance:
        failures.append(f"incomplete: values sum to {total}")
    agg: dict[tuple, float] = {}
    for f, m in combo.entries:
        if f <= 0:
            failures.append(f"nonpositive value {f}")
        rep = validate_mapping(instance, m)
        if not rep.valid:
            failures.append(f"invalid mapping: {rep.violations[0]}")
            continue
        for key, amount in allocations(instance, m).items():
            agg[key] = agg.get(key, 0.0) + f * amount
    if solution is not None:
        for key, amount in agg.items():
            if key in instance.substrate.node_capacity:
                avar = solution.get(name_a_node(*key), 0.0)
            else:
                avar = solution.get(name_a_edge(*key), 0.0)
            if amount > avar + tolerance:
                failures.append(
                    f"allocation bound violated at {key}: {amount} > {avar}"
                )
    return VerifyReport(ok=not failures, failures=tuple(failures))


def best_mapping(
    instance: Instance, combo: ConvexCombination
) -> Optional[tuple[MappingResult, float]]:
    """Cheapest capacity-respecting entry of the combination."""
    best: Optional[tuple[MappingResult, float]] = None
    for _, m in combo.entries:
        if not respects_capacities(instance, m):
            continue
        cost = mapping_cost(instance, m)
        if best is None or cost < best[1] - 1e-12 or (
            abs(cost - best[1]) <= 1e-12 and m.canonical() < best[0].canonical()
        ):
            best = (m, cost)
    return best
