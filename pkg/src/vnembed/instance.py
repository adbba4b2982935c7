"""VNEP instances: substrate, request, mappings, and convex combinations.

A substrate node offers one capacity per supported type; edge resources are the
substrate arcs themselves. Requests are connected digraphs without loops or
antiparallel edge pairs. A mapping places every request node on a substrate
node of matching type and every request edge on a (possibly empty) simple
substrate path between the endpoint images.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping as TMapping, Optional, Sequence

from .errors import InstanceError

# Identifiers feed the canonical variable-name and cost-key grammars; the
# pattern keeps those grammars injective.
_ID_RE = re.compile(r"^[A-Za-z0-9_]+$")

Edge = tuple[str, str]


def _check_ident(name: str, role: str) -> str:
    if not isinstance(name, str) or not _ID_RE.match(name):
        raise InstanceError(f"invalid {role} identifier {name!r}: must match [A-Za-z0-9_]+")
    return name


@dataclass(frozen=True)
class SubstrateGraph:
    """Directed substrate topology with typed node capacities."""

    nodes: tuple[str, ...]
    edges: tuple[Edge, ...]
    types: frozenset[str]
    supported_types: TMapping[str, frozenset[str]]
    node_capacity: TMapping[tuple[str, str], float]  # (node, type) -> capacity
    edge_capacity: TMapping[Edge, float]

    def __post_init__(self):
        seen = set()
        for u in self.nodes:
            _check_ident(u, "substrate node")
            if u in seen:
                raise InstanceError(f"duplicate substrate node {u!r}")
            seen.add(u)
        for (u, v) in self.edges:
            if u == v:
                raise InstanceError(f"loop edge ({u!r},{v!r}) in substrate")
            if u not in seen or v not in seen:
                raise InstanceError(f"substrate edge ({u!r},{v!r}) references unknown node")
        if len(set(self.edges)) != len(self.edges):
            raise InstanceError("duplicate substrate edge")
        for (u, tau), cap in self.node_capacity.items():
            if tau not in self.supported_types.get(u, frozenset()):
                raise InstanceError(f"capacity given for unsupported type {tau!r} at node {u!r}")
            if cap <= 0:
                raise InstanceError(f"nonpositive capacity for ({u!r},{tau!r})")
        for e, cap in self.edge_capacity.items():
            if e not in set(self.edges):
                raise InstanceError(f"capacity for unknown substrate edge {e!r}")
            if cap <= 0:
                raise InstanceError(f"nonpositive capacity for substrate edge {e!r}")

    @cached_property
    def out_edges(self) -> dict[str, tuple[Edge, ...]]:
        adj: dict[str, list[Edge]] = {u: [] for u in self.nodes}
        for (u, v) in self.edges:
            adj[u].append((u, v))
        return {u: tuple(sorted(es)) for u, es in adj.items()}

    @cached_property
    def in_edges(self) -> dict[str, tuple[Edge, ...]]:
        adj: dict[str, list[Edge]] = {u: [] for u in self.nodes}
        for (u, v) in self.edges:
            adj[v].append((u, v))
        return {u: tuple(sorted(es)) for u, es in adj.items()}

    def nodes_supporting(self, tau: Optional[str]) -> tuple[str, ...]:
        """Substrate nodes supporting type `tau`; wildcard None means all."""
        if tau is None:
            return self.nodes
        return tuple(u for u in self.nodes if tau in self.supported_types.get(u, frozenset()))


@dataclass(frozen=True)
class RequestGraph:
    """Directed request topology; no loops, no antiparallel pairs, connected."""

    nodes: tuple[str, ...]
    edges: tuple[Edge, ...]
    node_type: TMapping[str, Optional[str]]  # None = wildcard (virtual nodes only)
    node_demand: TMapping[str, float]
    edge_demand: TMapping[Edge, float]

    def __post_init__(self):
        seen = set()
        for i in self.nodes:
            _check_ident(i, "request node")
            if i in seen:
                raise InstanceError(f"duplicate request node {i!r}")
            seen.add(i)
        eset = set()
        for (i, j) in self.edges:
            if i == j:
                raise InstanceError(f"loop edge ({i!r},{j!r}) in request")
            if i not in seen or j not in seen:
                raise InstanceError(f"request edge ({i!r},{j!r}) references unknown node")
            if (j, i) in eset:
                raise InstanceError(f"antiparallel request edge pair {i!r}<->{j!r}")
            if (i, j) in eset:
                raise InstanceError(f"duplicate request edge ({i!r},{j!r})")
            eset.add((i, j))
        for i in self.nodes:
            if i not in self.node_type:
                raise InstanceError(f"request node {i!r} missing type")
            if self.node_demand.get(i, 0.0) < 0:
                raise InstanceError(f"negative demand at request node {i!r}")
        for e in self.edges:
            if self.edge_demand.get(e, 0.0) < 0:
                raise InstanceError(f"negative demand at request edge {e!r}")
        if len(self.nodes) > 1 and not self._connected():
            raise InstanceError("request topology is not connected")

    def _connected(self) -> bool:
        adj: dict[str, set[str]] = {i: set() for i in self.nodes}
        for (i, j) in self.edges:
            adj[i].add(j)
            adj[j].add(i)
        stack = [self.nodes[0]]
        seen = {self.nodes[0]}
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        return len(seen) == len(self.nodes)

    @cached_property
    def undirected_adjacency(self) -> dict[str, tuple[str, ...]]:
        adj: dict[str, set[str]] = {i: set() for i in self.nodes}
        for (i, j) in self.edges:
            adj[i].add(j)
            adj[j].add(i)
        return {i: tuple(sorted(ns)) for i, ns in adj.items()}

    def is_tree(self) -> bool:
        return len(self.edges) == len(self.nodes) - 1


@dataclass(frozen=True)
class Instance:
    """A VNEP instance: request + substrate + unit allocation costs."""

    substrate: SubstrateGraph
    request: RequestGraph
    node_cost: TMapping[tuple[str, str], float] = field(default_factory=dict)
    edge_cost: TMapping[Edge, float] = field(default_factory=dict)

    def __post_init__(self):
        for i in self.request.nodes:
            tau = self.request.node_type[i]
            if tau is not None and tau not in self.substrate.types:
                raise InstanceError(f"request node {i!r} has unknown type {tau!r}")

    def cost_of_node_resource(self, u: str, tau: str) -> float:
        return self.node_cost.get((u, tau), 1.0)

    def cost_of_edge_resource(self, e: Edge) -> float:
        return self.edge_cost.get(e, 1.0)

    def node_resources(self) -> tuple[tuple[str, str], ...]:
        out = []
        for u in self.substrate.nodes:
            for tau in sorted(self.substrate.supported_types.get(u, frozenset())):
                out.append((u, tau))
        return tuple(out)


@dataclass(frozen=True)
class MappingResult:
    """A request mapping: node placement plus per-edge substrate paths."""

    node_map: TMapping[str, str]
    edge_map: TMapping[Edge, tuple[Edge, ...]]

    def canonical(self) -> str:
        nodes = ",".join(f"{i}:{u}" for i, u in sorted(self.node_map.items()))
        edges = ";".join(
            f"{i}->{j}=" + "|".join(f"{u}->{v}" for (u, v) in path)
            for (i, j), path in sorted(self.edge_map.items())
        )
        return nodes + "//" + edges


@dataclass(frozen=True)
class ConvexCombination:
    """Weighted valid mappings; weights sum to one when complete."""

    entries: tuple[tuple[float, MappingResult], ...]

    def total(self) -> float:
        return sum(f for f, _ in self.entries)

    def is_complete(self, tol: float = 1e-9) -> bool:
        return abs(self.total() - 1.0) <= tol


@dataclass(frozen=True)
class ValidationReport:
    valid: bool
    violations: tuple[str, ...]


def load_instance(document: str | bytes | dict) -> Instance:
    """Parse an instance JSON document into an Instance.

    The document may be raw JSON text/bytes or an already-decoded dict; a
    wrapper of the form {"instance": {...}} (generator output) is unwrapped.
    """
    if isinstance(document, (str, bytes)):
        try:
            doc = json.loads(document)
        except json.JSONDecodeError as exc:
            raise InstanceError(f"invalid JSON: {exc}") from exc
    else:
        doc = document
    if not isinstance(doc, dict):
        raise InstanceError("instance document must be a JSON object")
    if "instance" in doc and "substrate" not in doc:
        doc = doc["instance"]
    try:
        sub = doc["substrate"]
        req = doc["request"]
    except (KeyError, TypeError) as exc:
        raise InstanceError(f"missing section: {exc}") from exc

    s_nodes, supported, node_cap = [], {}, {}
    for nd in sub.get("nodes", []):
        nid = _check_ident(nd["id"], "substrate node")
        s_nodes.append(nid)
        tys = frozenset(_check_ident(t, "type") for t in nd.get("types", []))
        supported[nid] = tys
        for tau, cap in nd.get("capacity", {}).items():
            if tau not in tys:
                raise InstanceError(f"capacity for unsupported type {tau!r} at {nid!r}")
            node_cap[(nid, tau)] = float(cap)
        for tau in tys:
            if (nid, tau) not in node_cap:
                raise InstanceError(f"missing capacity for type {tau!r} at {nid!r}")
    s_edges, edge_cap = [], {}
    for ed in sub.get("edges", []):
        e = (_check_ident(ed["tail"], "substrate node"), _check_ident(ed["head"], "substrate node"))
        s_edges.append(e)
        edge_cap[e] = float(ed["capacity"])
    types = frozenset().union(*supported.values()) if supported else frozenset()
    substrate = SubstrateGraph(
        nodes=tuple(sorted(s_nodes)),
        edges=tuple(sorted(s_edges)),
        types=types,
        supported_types=supported,
        node_capacity=node_cap,
        edge_capacity=edge_cap,
    )

    r_nodes, r_type, r_dem = [], {}, {}
    for nd in req.get("nodes", []):
        nid = _check_ident(nd["id"], "request node")
        r_nodes.append(nid)
        r_type[nid] = _check_ident(nd["type"], "type")
        r_dem[nid] = float(nd.get("demand", 0.0))
    r_edges, re_dem = [], {}
    for ed in req.get("edges", []):
        e = (_check_ident(ed["tail"], "request node"), _check_ident(ed["head"], "request node"))
        r_edges.append(e)
        re_dem[e] = float(ed.get("demand", 0.0))
    request = RequestGraph(
        nodes=tuple(sorted(r_nodes)),
        edges=tuple(sorted(r_edges)),
        node_type=r_type,
        node_demand=r_dem,
        edge_demand=re_dem,
    )

    node_cost, edge_cost = {}, {}
    for key, val in doc.get("costs", {}).get("node", {}).items():
        try:
            uid, tau = key.split(".")
        except ValueError as exc:
            raise InstanceError(f"bad node cost key {key!r}, expected '<id>.<type>'") from exc
        node_cost[(uid, tau)] = float(val)
    for key, val in doc.get("costs", {}).get("edge", {}).items():
        try:
            tail, head = key.split("->")
        except ValueError as exc:
            raise InstanceError(f"bad edge cost key {key!r}, expected '<tail>-><head>'") from exc
        edge_cost[(tail, head)] = float(val)
    return Instance(substrate=substrate, request=request, node_cost=node_cost, edge_cost=edge_cost)


def dump_instance(instance: Instance) -> dict:
    """Inverse of load_instance; emits the documented JSON schema."""
    sub = instance.substrate
    req = instance.request
    doc: dict = {
        "substrate": {
            "nodes": [
                {
                    "id": u,
                    "types": sorted(sub.supported_types.get(u, frozenset())),
                    "capacity": {
                        tau: sub.node_capacity[(u, tau)]
                        for tau in sorted(sub.supported_types.get(u, frozenset()))
                    },
                }
                for u in sub.nodes
            ],
            "edges": [
                {"tail": u, "head": v, "capacity": sub.edge_capacity[(u, v)]}
                for (u, v) in sub.edges
            ],
        },
        "request": {
            "nodes": [
                {"id": i, "type": req.node_type[i], "demand": req.node_demand.get(i, 0.0)}
                for i in req.nodes
            ],
            "edges": [
                {"tail": i, "head": j, "demand": req.edge_demand.get((i, j), 0.0)}
                for (i, j) in req.edges
            ],
        },
    }
    if instance.node_cost or instance.edge_cost:
        doc["costs"] = {
            "node": {f"{u}.{tau}": c for (u, tau), c in sorted(instance.node_cost.items())},
            "edge": {f"{u}->{v}": c for (u, v), c in sorted(instance.edge_cost.items())},
        }
    return doc


def _path_ok(substrate: SubstrateGraph, path: Sequence[Edge], start: str, end: str) -> Optional[str]:
    """None if path is a simple substrate walk from start to end, else a reason."""
    if not path:
        return None if start == end else f"empty path but endpoints {start!r} != {end!r}"
    cur = start
    visited = {start}
    sub_edges = set(substrate.edges)
    for (u, v) in path:
        if (u, v) not in sub_edges:
            return f"unknown substrate edge ({u!r},{v!r})"
        if u != cur:
            return f"path breaks at {u!r} (expected {cur!r})"
        if v in visited:
            return f"path revisits node {v!r}"
        visited.add(v)
        cur = v
    if cur != end:
        return f"path endpoint mismatch: ends at {cur!r}, expected {end!r}"
    return None


def validate_mapping(instance: Instance, m: MappingResult) -> ValidationReport:
    """Check completeness, type support, and path connectivity of a mapping."""
    req, sub = instance.request, instance.substrate
    violations: list[str] = []
    for i in req.nodes:
        if i not in m.node_map:
            violations.append(f"unmapped node {i}")
            continue
        u = m.node_map[i]
        if u not in set(sub.nodes):
            violations.append(f"node {i} mapped to unknown substrate node {u}")
            continue
        tau = req.node_type[i]
        if tau is not None and tau not in sub.supported_types.get(u, frozenset()):
            violations.append(f"node {i} mapped to {u} which does not support type {tau}")
    for i in m.node_map:
        if i not in set(req.nodes):
            violations.append(f"mapping of unknown request node {i}")
    for e in req.edges:
        if e not in m.edge_map:
            violations.append(f"unmapped edge {e[0]}->{e[1]}")
            continue
        i, j = e
        if i in m.node_map and j in m.node_map:
            reason = _path_ok(sub, m.edge_map[e], m.node_map[i], m.node_map[j])
            if reason:
                violations.append(f"edge {i}->{j}: {reason}")
    for e in m.edge_map:
        if e not in set(req.edges):
            violations.append(f"mapping of unknown request edge {e[0]}->{e[1]}")
    return ValidationReport(valid=not violations, violations=tuple(violations))


def allocations(instance: Instance, m: MappingResult) -> dict[tuple, float]:
    """Per-resource allocation of a valid mapping.

    Node resources are keyed (u, type), edge resources (u, v).
    """
    report = validate_mapping(instance, m)
    if not report.valid:
        raise InstanceError(f"allocations of invalid mapping: {report.violations[0]}")
    req = instance.request
    out: dict[tuple, float] = {}
    for i, u in m.node_map.items():
        tau = req.node_type[i]
        if tau is None:
            continue
        key = (u, tau)
        out[key] = out.get(key, 0.0) + req.node_demand.get(i, 0.0)
    for e, path in m.edge_map.items():
        dem = req.edge_demand.get(e, 0.0)
        for arc in path:
            out[arc] = out.get(arc, 0.0) + dem
    return out


def respects_capacities(instance: Instance, m: MappingResult, tol: float = 1e-9) -> bool:
    alloc = allocations(instance, m)
    sub = instance.substrate
    for key, amount in alloc.items():
        u_or_edge = key
        if u_or_edge in sub.node_capacity:
            cap = sub.node_capacity[u_or_edge]
        elif u_or_edge in sub.edge_capacity:
            cap = sub.edge_capacity[u_or_edge]
        else:
            return False
        if amount > cap + tol:
            return False
    return True


def mapping_cost(instance: Instance, m: MappingResult) -> float:
    """Objective value of a mapping: unit costs times allocations."""
    total = 0.0
    for key, amount in allocations(instance, m).items():
        if key in instance.substrate.node_capacity:
            total += instance.cost_of_node_resource(*key) * amount
        else:
            total += instance.cost_of_edge_resource(key) * amount
    return total


def project_mapping(
    m: MappingResult,
    node_subset: Iterable[str],
    edge_subset: Iterable[Edge],
) -> MappingResult:
    """Restrict a mapping to the given node and edge subsets."""
    nodes = set(node_subset)
    edges = set(edge_subset)
    return MappingResult(
        node_map={i: u for i, u in m.node_map.items() if i in nodes},
        edge_map={e: p for e, p in m.edge_map.items() if e in edges},
    )
