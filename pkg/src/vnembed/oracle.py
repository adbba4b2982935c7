"""Brute-force enumeration of valid mappings on tiny instances.

Ground truth for the LP pipeline: enumerate every type-respecting node map
and, per request edge, every simple substrate path between the endpoint
images, up to a hop budget. The capacity-respecting subset and the cheapest
such mapping serve as oracles for relaxation bounds and decompositions.
Cost pruning in oracle_best assumes nonnegative unit costs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

from .errors import BudgetExceededError
from .instance import (
    Edge,
    Instance,
    MappingResult,
    respects_capacities,
    validate_mapping,
)


@dataclass(frozen=True)
class OracleBudget:
    max_node_combinations: int = 200_000
    max_path_hops: int = 4
    max_total_mappings: int = 500_000


@dataclass(frozen=True)
class EnumeratedMapping:
    mapping: MappingResult
    respects_capacities: bool


def _simple_paths(instance: Instance, start: str, end: str, max_hops: int) -> list[tuple[Edge, ...]]:
    """All simple directed paths start->end with at most max_hops edges."""
    sub = instance.substrate
    out: list[tuple[Edge, ...]] = []
    if start == end:
        out.append(())
    stack: list[tuple[str, tuple[Edge, ...], frozenset[str]]] = [(start, (), frozenset({start}))]
    while stack:
        node, path, seen = stack.pop()
        if len(path) >= max_hops:
            continue
        for (u, v) in sub.out_edges[node]:
            if v in seen:
                continue
            new_path = path + ((u, v),)
            if v == end:
                out.append(new_path)
            else:
                stack.append((v, new_path, seen | {v}))
    return sorted(out)


def enumerate_valid_mappings(
    instance: Instance, budget: OracleBudget = OracleBudget()
) -> list[EnumeratedMapping]:
    """Every valid mapping within budget, capacity-respecting subset flagged."""
    req = instance.request
    pools = []
    for i in req.nodes:
        pool = instance.substrate.nodes_supporting(req.node_type[i])
        if not pool:
            return []
        pools.append(pool)
    combos = 1
    for pool in pools:
        combos *= len(pool)
    if combos > budget.max_node_combinations:
        raise BudgetExceededError(
            f"{combos} node-map combinations exceed budget {budget.max_node_combinations}"
        )

    path_cache: dict[tuple[str, str], list[tuple[Edge, ...]]] = {}

    def paths(u: str, v: str) -> list[tuple[Edge, ...]]:
        if (u, v) not in path_cache:
            path_cache[(u, v)] = _simple_paths(instance, u, v, budget.max_path_hops)
        return path_cache[(u, v)]

    results: list[EnumeratedMapping] = []
    for combo in itertools.product(*pools):
        node_map = dict(zip(req.nodes, combo))
        per_edge = []
        ok = True
        for (i, j) in req.edges:
            ps = paths(node_map[i], node_map[j])
            if not ps:
                ok = False
                break
            per_edge.append(((i, j), ps))
        if not ok:
            continue
        for choice in itertools.product(*[ps for (_, ps) in per_edge]):
            m = MappingResult(
                node_map=dict(node_map),
                edge_map={e: p for ((e, _), p) in zip(per_edge, choice)},
            )
            assert validate_mapping(instance, m).valid
            results.append(
                EnumeratedMapping(mapping=m, respects_capacities=respects_capacities(instance, m))
            )
            if len(results) > budget.max_total_mappings:
                raise BudgetExceededError(
                    f"more than {budget.max_total_mappings} mappings; tighten the budget"
                )
    return results


def oracle_best(
    instance: Instance, budget: OracleBudget = OracleBudget()
) -> Optional[tuple[MappingResult, float]]:
    """Cheapest capacity-respecting valid mapping, or None if none exists.

    Exhaustive over node maps; per node map a depth-first search assigns edge
    paths cheapest-first while tracking remaining capacities, pruning branches
    that overrun a capacity or the best cost found so far.
    """
    req, sub = instance.request, instance.substrate
    pools = []
    for i in req.nodes:
        pool = sub.nodes_supporting(req.node_type[i])
        if not pool:
            return None
        pools.append(pool)
    combos = 1
    for pool in pools:
        combos *= len(pool)
    if combos > budget.max_node_combinations:
        raise BudgetExceededError(
            f"{combos} node-map combinations exceed budget {budget.max_node_combinations}"
        )

    path_cache: dict[tuple[str, str], list[tuple[float, tuple[Edge, ...]]]] = {}

    def paths(u: str, v: str) -> list[tuple[float, tuple[Edge, ...]]]:
        if (u, v) not in path_cache:
            opts = []
            for p in _simple_paths(instance, u, v, budget.max_path_hops):
                cost = sum(instance.cost_of_edge_resource(arc) for arc in p)
                opts.append((cost, p))
            opts.sort()
            path_cache[(u, v)] = opts
        return path_cache[(u, v)]

    edges = sorted(req.edges)
    best: Optional[tuple[MappingResult, float]] = None

    for combo in itertools.product(*pools):
        node_map = dict(zip(req.nodes, combo))
        node_alloc: dict[tuple[str, str], float] = {}
        ok = True
        node_cost = 0.0
        for i, u in node_map.items():
            tau = req.node_type[i]
            if tau is None:
                continue
            key = (u, tau)
            node_alloc[key] = node_alloc.get(key, 0.0) + req.node_demand.get(i, 0.0)
            if node_alloc[key] > sub.node_capacity[key] + 1e-9:
                ok = False
                break
            node_cost += instance.cost_of_node_resource(u, tau) * req.node_demand.get(i, 0.0)
        if not ok or (best is not None and node_cost > best[1] + 1e-12):
            continue

        chosen: dict[Edge, tuple[Edge, ...]] = {}
        arc_load: dict[Edge, float] = {}

        def dfs(idx: int, cost: float) -> None:
            nonlocal best
            if best is not None and cost > best[1] + 1e-12:
                return
            if idx == len(edges):
                m = MappingResult(node_map=dict(node_map), edge_map=dict(chosen))
                if best is None or cost < best[1] - 1e-12 or (
                    abs(cost - best[1]) <= 1e-12 and m.canonical() < best[0].canonical()
                ):
                    best = (m, cost)
                return
            e = edges[idx]
            dem = req.edge_demand.get(e, 0.0)
            for path_cost, p in paths(node_map[e[0]], node_map[e[1]]):
                fits = True
                for arc in p:
                    if arc_load.get(arc, 0.0) + dem > sub.edge_capacity[arc] + 1e-9:
                        fits = False
                        break
                if not fits:
                    continue
                for arc in p:
                    arc_load[arc] = arc_load.get(arc, 0.0) + dem
                chosen[e] = p
                dfs(idx + 1, cost + dem * path_cost)
                del chosen[e]
                for arc in p:
                    arc_load[arc] -= dem
        dfs(0, node_cost)
    return best
