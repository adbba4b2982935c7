"""Linear program construction for the MCF relaxation and its label-set
ordering refinement, plus lifting, feasibility checking, and LP-format I/O.

Subformulations copy the flow/load constraints of the MCF program onto one
request edge, once per mapping of that edge's label set; per-node gamma layers
tie the subformulations together along the running intersection ordering.
Canonical variable names: y[i@u], z[i->j@u->v|m], y[i@u|i->j|m], a[u.t],
a[u->v], a[u.t|i->j|m], a[u->v|i->j|m], g[i@u|a|m] with m a sorted
"k:u,l:v" serialization of the label-set mapping.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping as TMapping, Protocol, Sequence

from .errors import LpBuildError, OrderingError
from .extraction import EdgeLabelAssignment, ExtractionOrder
from .instance import ConvexCombination, Edge, Instance, validate_mapping
from .orderings import LabelSetOrdering, predecessor_indices, predecessor_sets

INF = float("inf")


# ---------------------------------------------------------------------------
# program representation


@dataclass
class Variable:
    name: str
    lb: float = 0.0
    ub: float = INF


@dataclass
class LinearConstraint:
    name: str
    coeffs: dict[str, float]
    relation: str  # "=" or "<="
    rhs: float


@dataclass
class LpProgram:
    variables: list[Variable] = field(default_factory=list)
    constraints: list[LinearConstraint] = field(default_factory=list)
    objective: dict[str, float] = field(default_factory=dict)
    sense: str = "min"
    comment: str = ""
    _index: dict[str, int] = field(default_factory=dict, repr=False)

    def add_var(self, name: str, lb: float = 0.0, ub: float = INF) -> str:
        if name in self._index:
            raise LpBuildError(f"duplicate variable {name!r}")
        self._index[name] = len(self.variables)
        self.variables.append(Variable(name, lb, ub))
        return name

    def has_var(self, name: str) -> bool:
        return name in self._index

    def var(self, name: str) -> Variable:
        return self.variables[self._index[name]]

    def restrict_upper(self, name: str, ub: float) -> None:
        v = self.var(name)
        v.ub = min(v.ub, ub)

    def add_constraint(self, name: str, coeffs: dict[str, float], relation: str, rhs: float) -> None:
        for var in coeffs:
            if var not in self._index:
                raise LpBuildError(f"constraint {name!r} references unknown variable {var!r}")
        if relation not in ("=", "<="):
            raise LpBuildError(f"bad relation {relation!r}")
        self.constraints.append(LinearConstraint(name, dict(coeffs), relation, rhs))

    def stats(self) -> dict:
        return {"variables": len(self.variables), "constraints": len(self.constraints)}


@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool
    max_residual: float
    violated: tuple[str, ...]


# ---------------------------------------------------------------------------
# canonical variable names


def ser_mapping(m: TMapping[str, str]) -> str:
    return ",".join(f"{k}:{m[k]}" for k in sorted(m))


def parse_mapping(s: str) -> dict[str, str]:
    if not s:
        return {}
    return dict(pair.split(":", 1) for pair in s.split(","))


@dataclass(frozen=True)
class VariableKey:
    """Structured identity of an LP variable.

    `name` renders the injective canonical string; parse_variable_name is its
    inverse. Node resources and substrate arcs are both (a, b) pairs, so
    `resource_is_node` disambiguates allocation variables.
    """

    kind: str  # y_global | a_global | y_sub | z_sub | a_sub | gamma
    request_element: Optional[tuple] = None  # request node or edge
    substrate_element: Optional[tuple] = None  # node, (node, type), or arc
    edge_mapping: tuple = ()  # sorted (label node, substrate node) pairs
    layer: str = ""  # gamma ordering index, optionally region-tagged
    resource_is_node: bool = False

    @property
    def name(self) -> str:
        m = dict(self.edge_mapping)
        if self.kind == "y_global":
            return name_y(self.request_element[0], self.substrate_element[0])
        if self.kind == "a_global":
            if self.resource_is_node:
                return name_a_node(*self.substrate_element)
            return name_a_edge(*self.substrate_element)
        if self.kind == "y_sub":
            i, e = self.request_element
            return name_y_sub(i, self.substrate_element[0], e, m)
        if self.kind == "z_sub":
            return name_z_sub(self.request_element, self.substrate_element, m)
        if self.kind == "a_sub":
            if self.resource_is_node:
                u, tau = self.substrate_element
                return name_a_node_sub(u, tau, self.request_element, m)
            return name_a_edge_sub(self.substrate_element, self.request_element, m)
        if self.kind == "gamma":
            region, _, layer = self.layer.rpartition(".")
            return name_gamma(
                self.request_element[0], self.substrate_element[0], int(layer), m, region
            )
        raise LpBuildError(f"unknown variable kind {self.kind!r}")


def parse_variable_name(name: str) -> VariableKey:
    """Inverse of the canonical naming scheme."""
    kind_char, rest = name[0], name[2:-1]  # strip "x[" and "]"
    if kind_char == "y":
        head, _, tail = rest.partition("|")
        i, _, u = head.partition("@")
        if not tail:
            return VariableKey(kind="y_global", request_element=(i,), substrate_element=(u,))
        edge_s, _, m_s = tail.partition("|")
        t, _, h = edge_s.partition("->")
        return VariableKey(
            kind="y_sub",
            request_element=(i, (t, h)),
            substrate_element=(u,),
            edge_mapping=tuple(sorted(parse_mapping(m_s).items())),
        )
    if kind_char == "z":
        head, _, m_s = rest.partition("|")
        e_s, _, arc_s = head.partition("@")
        t, _, h = e_s.partition("->")
        a, _, b = arc_s.partition("->")
        return VariableKey(
            kind="z_sub",
            request_element=(t, h),
            substrate_element=(a, b),
            edge_mapping=tuple(sorted(parse_mapping(m_s).items())),
        )
    if kind_char == "g":
        head, layer, m_s = rest.split("|")
        i, _, u = head.partition("@")
        return VariableKey(
            kind="gamma",
            request_element=(i,),
            substrate_element=(u,),
            edge_mapping=tuple(sorted(parse_mapping(m_s).items())),
            layer=layer,
        )
    if kind_char == "a":
        parts = rest.split("|")
        res = parts[0]
        if "->" in res:
            u, _, v = res.partition("->")
            sub_el, is_node = (u, v), False
        else:
            u, _, tau = res.partition(".")
            sub_el, is_node = (u, tau), True
        if len(parts) == 1:
            return VariableKey(kind="a_global", substrate_element=sub_el, resource_is_node=is_node)
        t, _, h = parts[1].partition("->")
        return VariableKey(
            kind="a_sub",
            request_element=(t, h),
            substrate_element=sub_el,
            edge_mapping=tuple(sorted(parse_mapping(parts[2]).items())),
            resource_is_node=is_node,
        )
    raise LpBuildError(f"cannot parse variable name {name!r}")


def name_y(i: str, u: str) -> str:
    return f"y[{i}@{u}]"


def name_a_node(u: str, tau: str) -> str:
    return f"a[{u}.{tau}]"


def name_a_edge(u: str, v: str) -> str:
    return f"a[{u}->{v}]"


def name_y_sub(i: str, u: str, e: Edge, m: TMapping[str, str]) -> str:
    return f"y[{i}@{u}|{e[0]}->{e[1]}|{ser_mapping(m)}]"


def name_z_sub(e: Edge, uv: Edge, m: TMapping[str, str]) -> str:
    return f"z[{e[0]}->{e[1]}@{uv[0]}->{uv[1]}|{ser_mapping(m)}]"


def name_a_node_sub(u: str, tau: str, e: Edge, m: TMapping[str, str]) -> str:
    return f"a[{u}.{tau}|{e[0]}->{e[1]}|{ser_mapping(m)}]"


def name_a_edge_sub(uv: Edge, e: Edge, m: TMapping[str, str]) -> str:
    return f"a[{uv[0]}->{uv[1]}|{e[0]}->{e[1]}|{ser_mapping(m)}]"


def name_gamma(i: str, u: str, layer: int, m: TMapping[str, str], region: str = "") -> str:
    tag = f"{region}.{layer}" if region else f"{layer}"
    return f"g[{i}@{u}|{tag}|{ser_mapping(m)}]"


# ---------------------------------------------------------------------------
# mapping spaces


def mapping_space(instance: Instance, label_set: Iterable[str]) -> list[dict[str, str]]:
    """All type-respecting functions from the label set into the substrate."""
    keys = sorted(label_set)
    pools = []
    for k in keys:
        tau = instance.request.node_type[k]
        pool = instance.substrate.nodes_supporting(tau)
        if not pool:
            raise LpBuildError(f"no substrate node supports type {tau!r} of {k!r}")
        pools.append(pool)
    out = []
    for combo in itertools.product(*pools):
        out.append(dict(zip(keys, combo)))
    return out


def restrict(m: TMapping[str, str], keys: Iterable[str]) -> dict[str, str]:
    ks = set(keys)
    return {k: v for k, v in m.items() if k in ks}


# ---------------------------------------------------------------------------
# MCF formulation (relaxation of the mixed-integer program)


def _typed_nodes(instance: Instance, i: str) -> tuple[str, ...]:
    pool = instance.substrate.nodes_supporting(instance.request.node_type[i])
    if not pool:
        raise LpBuildError(
            f"request node {i!r} has type {instance.request.node_type[i]!r} "
            "absent from the substrate"
        )
    return pool


def _add_allocation_vars(prog: LpProgram, instance: Instance) -> None:
    sub = instance.substrate
    for (u, tau) in instance.node_resources():
        prog.add_var(name_a_node(u, tau), 0.0, sub.node_capacity[(u, tau)])
    for (u, v) in sub.edges:
        prog.add_var(name_a_edge(u, v), 0.0, sub.edge_capacity[(u, v)])


def _objective_from_costs(prog: LpProgram, instance: Instance) -> None:
    obj: dict[str, float] = {}
    for (u, tau) in instance.node_resources():
        obj[name_a_node(u, tau)] = instance.cost_of_node_resource(u, tau)
    for (u, v) in instance.substrate.edges:
        obj[name_a_edge(u, v)] = instance.cost_of_edge_resource((u, v))
    prog.objective = obj
    prog.sense = "min"


def build_mcf(instance: Instance, relaxed: bool = True) -> LpProgram:
    """Multi-commodity-flow formulation; integrality is never enforced, the
    flag only marks the program's intent in its comment."""
    req, sub = instance.request, instance.substrate
    prog = LpProgram(comment="mcf relaxation" if relaxed else "mcf (integer intent)")
    for i in req.nodes:
        for u in _typed_nodes(instance, i):
            prog.add_var(name_y(i, u), 0.0, 1.0)
    for e in req.edges:
        for uv in sub.edges:
            prog.add_var(name_z_sub(e, uv, {}), 0.0, 1.0)
    _add_allocation_vars(prog, instance)

    # force embedding
    for i in req.nodes:
        prog.add_constraint(
            f"femb[{i}]",
            {name_y(i, u): 1.0 for u in _typed_nodes(instance, i)},
            "=",
            1.0,
        )
    # flow conservation / induction per request edge and substrate node
    for (i, j) in req.edges:
        ty_i = set(_typed_nodes(instance, i))
        ty_j = set(_typed_nodes(instance, j))
        for u in sub.nodes:
            coeffs: dict[str, float] = {}
            for uv in sub.out_edges[u]:
                coeffs[name_z_sub((i, j), uv, {})] = coeffs.get(name_z_sub((i, j), uv, {}), 0.0) + 1.0
            for vu in sub.in_edges[u]:
                coeffs[name_z_sub((i, j), vu, {})] = coeffs.get(name_z_sub((i, j), vu, {}), 0.0) - 1.0
            if u in ty_i:
                coeffs[name_y(i, u)] = coeffs.get(name_y(i, u), 0.0) - 1.0
            if u in ty_j:
                coeffs[name_y(j, u)] = coeffs.get(name_y(j, u), 0.0) + 1.0
            prog.add_constraint(f"flow[{i}->{j}@{u}]", coeffs, "=", 0.0)
    # forbid undersized nodes/edges (as zero upper bounds)
    for i in req.nodes:
        tau = req.node_type[i]
        for u in _typed_nodes(instance, i):
            if tau is not None and req.node_demand.get(i, 0.0) > sub.node_capacity[(u, tau)]:
                prog.restrict_upper(name_y(i, u), 0.0)
    for e in req.edges:
        for uv in sub.edges:
            if req.edge_demand.get(e, 0.0) > sub.edge_capacity[uv]:
                prog.restrict_upper(name_z_sub(e, uv, {}), 0.0)
    # load tracking
    for (u, tau) in instance.node_resources():
        coeffs = {name_a_node(u, tau): -1.0}
        for i in req.nodes:
            if req.node_type[i] == tau and u in set(_typed_nodes(instance, i)):
                coeffs[name_y(i, u)] = req.node_demand.get(i, 0.0)
        prog.add_constraint(f"nload[{u}.{tau}]", coeffs, "=", 0.0)
    for uv in sub.edges:
        coeffs = {name_a_edge(*uv): -1.0}
        for e in req.edges:
            coeffs[name_z_sub(e, uv, {})] = req.edge_demand.get(e, 0.0)
        prog.add_constraint(f"eload[{uv[0]}->{uv[1]}]", coeffs, "=", 0.0)

    _objective_from_costs(prog, instance)
    return prog


# ---------------------------------------------------------------------------
# adapted formulation (label set orderings)


class OrientedView(Protocol):
    nodes: tuple[str, ...]
    edges: tuple[Edge, ...]
    root: str

    def orig_edge(self, e: Edge) -> Edge: ...


@dataclass(frozen=True)
class RegionSpec:
    """One rooted piece of the build: a view, its ordering, and a gamma tag."""

    view: OrientedView
    omega: LabelSetOrdering
    tag: str = ""

    def out_edges(self, i: str) -> tuple[Edge, ...]:
        return tuple(e for e in self.view.edges if e[0] == i)

    def in_edges(self, i: str) -> tuple[Edge, ...]:
        return tuple(e for e in self.view.edges if e[1] == i)


def _region_incoming(spec: RegionSpec, labels: EdgeLabelAssignment, i: str) -> frozenset[str]:
    ins = spec.in_edges(i)
    if not ins:
        return frozenset()
    return labels.of(ins[0])


def _rep_index(spec: RegionSpec, labels: EdgeLabelAssignment, e: Edge) -> int:
    seq = spec.omega.omega(e[0])
    ls = labels.of(e)
    for a, s in enumerate(seq):
        if ls <= s:
            return a
    raise OrderingError(f"no representative label set for edge {e}")


def _add_subformulation(
    prog: LpProgram,
    instance: Instance,
    oriented: Edge,
    orig: Edge,
    label_set: frozenset[str],
    labeled_head: bool,
) -> list[dict[str, str]]:
    """Variables and edge-subgraph constraints for one oriented edge; returns
    the mapping space used (one subformulation per mapping)."""
    req, sub = instance.request, instance.substrate
    space = mapping_space(instance, label_set)
    (t, h) = orig
    for m_e in space:
        for i in (t, h):
            for u in _typed_nodes(instance, i):
                prog.add_var(name_y_sub(i, u, orig, m_e), 0.0, 1.0)
        for uv in sub.edges:
            prog.add_var(name_z_sub(orig, uv, m_e), 0.0, 1.0)
        taus = {req.node_type[t], req.node_type[h]} - {None}
        for (u, tau) in instance.node_resources():
            if tau in taus:
                prog.add_var(name_a_node_sub(u, tau, orig, m_e), 0.0, sub.node_capacity[(u, tau)])
        for uv in sub.edges:
            prog.add_var(name_a_edge_sub(uv, orig, m_e), 0.0, sub.edge_capacity[uv])

        mname = ser_mapping(m_e)
        ty_t = set(_typed_nodes(instance, t))
        ty_h = set(_typed_nodes(instance, h))
        for u in sub.nodes:
            coeffs: dict[str, float] = {}
            for uv in sub.out_edges[u]:
                key = name_z_sub(orig, uv, m_e)
                coeffs[key] = coeffs.get(key, 0.0) + 1.0
            for vu in sub.in_edges[u]:
                key = name_z_sub(orig, vu, m_e)
                coeffs[key] = coeffs.get(key, 0.0) - 1.0
            if u in ty_t:
                key = name_y_sub(t, u, orig, m_e)
                coeffs[key] = coeffs.get(key, 0.0) - 1.0
            if u in ty_h:
                key = name_y_sub(h, u, orig, m_e)
                coeffs[key] = coeffs.get(key, 0.0) + 1.0
            prog.add_constraint(f"flow[{t}->{h}@{u}|{mname}]", coeffs, "=", 0.0)
        # forbid undersized resources inside the subformulation
        for i in (t, h):
            tau = req.node_type[i]
            if tau is None:
                continue
            for u in _typed_nodes(instance, i):
                if req.node_demand.get(i, 0.0) > sub.node_capacity[(u, tau)]:
                    prog.restrict_upper(name_y_sub(i, u, orig, m_e), 0.0)
        for uv in sub.edges:
            if req.edge_demand.get(orig, 0.0) > sub.edge_capacity[uv]:
                prog.restrict_upper(name_z_sub(orig, uv, m_e), 0.0)
        # forbid end-node mappings inconsistent with the subformulation
        if labeled_head:
            head = oriented[1]
            for u in _typed_nodes(instance, head):
                if u != m_e[head]:
                    prog.restrict_upper(name_y_sub(head, u, orig, m_e), 0.0)
        # load tracking inside the subformulation
        for (u, tau) in instance.node_resources():
            if tau not in taus:
                continue
            coeffs = {name_a_node_sub(u, tau, orig, m_e): -1.0}
            for i in (t, h):
                if req.node_type[i] == tau and u in set(_typed_nodes(instance, i)):
                    key = name_y_sub(i, u, orig, m_e)
                    coeffs[key] = coeffs.get(key, 0.0) + req.node_demand.get(i, 0.0)
            prog.add_constraint(f"nload[{u}.{tau}|{t}->{h}|{mname}]", coeffs, "=", 0.0)
        for uv in sub.edges:
            coeffs = {
                name_a_edge_sub(uv, orig, m_e): -1.0,
                name_z_sub(orig, uv, m_e): req.edge_demand.get(orig, 0.0),
            }
            prog.add_constraint(
                f"eload[{uv[0]}->{uv[1]}|{t}->{h}|{mname}]", coeffs, "=", 0.0
            )
    return space


def build_adapted_regions(
    instance: Instance,
    labels: EdgeLabelAssignment,
    regions: Sequence[RegionSpec],
) -> LpProgram:
    """Adapted formulation over one or more rooted regions sharing the global
    node-embedding, aggregation, and load constraints."""
    req, sub = instance.request, instance.substrate
    prog = LpProgram(comment="adapted formulation")

    for i in req.nodes:
        for u in _typed_nodes(instance, i):
            prog.add_var(name_y(i, u), 0.0, 1.0)

    edge_spaces: dict[Edge, list[dict[str, str]]] = {}
    edge_of_oriented: dict[Edge, Edge] = {}
    for spec in regions:
        for e in sorted(spec.view.edges):
            orig = spec.view.orig_edge(e)
            ls = labels.of(e)
            labeled_head = e[1] in ls
            edge_spaces[orig] = _add_subformulation(prog, instance, e, orig, ls, labeled_head)
            edge_of_oriented[e] = orig

    # gamma variables per region, node, layer, mapping
    for spec in regions:
        for i in sorted(spec.view.nodes):
            seq = spec.omega.omega(i)
            for layer, s in enumerate(seq, start=1):
                for m_a in mapping_space(instance, s):
                    for u in _typed_nodes(instance, i):
                        prog.add_var(name_gamma(i, u, layer, m_a, spec.tag), 0.0, 1.0)

    _add_allocation_vars(prog, instance)

    # node embedding
    for i in req.nodes:
        prog.add_constraint(
            f"femb[{i}]", {name_y(i, u): 1.0 for u in _typed_nodes(instance, i)}, "=", 1.0
        )
    # node-to-subformulation aggregation, per original edge incident to i
    for (t, h) in sorted(edge_spaces):
        for i in (t, h):
            for u in _typed_nodes(instance, i):
                coeffs = {name_y(i, u): 1.0}
                for m_e in edge_spaces[(t, h)]:
                    key = name_y_sub(i, u, (t, h), m_e)
                    coeffs[key] = coeffs.get(key, 0.0) - 1.0
                prog.add_constraint(f"agg[{i}@{u}|{t}->{h}]", coeffs, "=", 0.0)

    # gamma links
    for spec in regions:
        tag = spec.tag
        for i in sorted(spec.view.nodes):
            seq = spec.omega.omega(i)
            spaces = [mapping_space(instance, s) for s in seq]
            preds = predecessor_sets(seq)
            pis = predecessor_indices(seq)
            # out-edges to the representative layer
            for e in sorted(spec.out_edges(i)):
                a = _rep_index(spec, labels, e)
                orig = spec.view.orig_edge(e)
                ls = labels.of(e)
                for m_e in edge_spaces[orig]:
                    for u in _typed_nodes(instance, i):
                        coeffs = {name_y_sub(i, u, orig, m_e): 1.0}
                        for m_a in spaces[a]:
                            if restrict(m_a, ls) == m_e:
                                key = name_gamma(i, u, a + 1, m_a, tag)
                                coeffs[key] = coeffs.get(key, 0.0) - 1.0
                        prog.add_constraint(
                            f"gout[{i}@{u}|{e[0]}->{e[1]}|{ser_mapping(m_e)}|{tag}]",
                            coeffs,
                            "=",
                            0.0,
                        )
            # in-edges to the first gamma layer
            for e in sorted(spec.in_edges(i)):
                orig = spec.view.orig_edge(e)
                inc = _region_incoming(spec, labels, i)
                for m_a in mapping_space(instance, inc):
                    for u in _typed_nodes(instance, i):
                        prog.add_constraint(
                            f"gin[{i}@{u}|{e[0]}->{e[1]}|{ser_mapping(m_a)}|{tag}]",
                            {
                                name_y_sub(i, u, orig, m_a): 1.0,
                                name_gamma(i, u, 1, m_a, tag): -1.0,
                            },
                            "=",
                            0.0,
                        )
            if not spec.in_edges(i):
                # the root's first layer is otherwise untied; pin it to the
                # global placement so the decomposition always finds it
                for u in _typed_nodes(instance, i):
                    prog.add_constraint(
                        f"groot[{i}@{u}|{tag}]",
                        {name_y(i, u): 1.0, name_gamma(i, u, 1, {}, tag): -1.0},
                        "=",
                        0.0,
                    )
            # label set continuity between each layer and its predecessor
            for a in range(len(seq)):
                if pis[a] == a:
                    continue
                b = pis[a]
                lp_set = preds[a]
                for m_p in mapping_space(instance, lp_set):
                    for u in _typed_nodes(instance, i):
                        coeffs: dict[str, float] = {}
                        for m_a in spaces[a]:
                            if restrict(m_a, lp_set) == m_p:
                                key = name_gamma(i, u, a + 1, m_a, tag)
                                coeffs[key] = coeffs.get(key, 0.0) + 1.0
                        for m_b in spaces[b]:
                            if restrict(m_b, lp_set) == m_p:
                                key = name_gamma(i, u, b + 1, m_b, tag)
                                coeffs[key] = coeffs.get(key, 0.0) - 1.0
                        prog.add_constraint(
                            f"gcont[{i}@{u}|{a+1}->{b+1}|{ser_mapping(m_p)}|{tag}]",
                            coeffs,
                            "=",
                            0.0,
                        )

    # allocation aggregation
    for (u, tau) in instance.node_resources():
        coeffs = {name_a_node(u, tau): -1.0}
        for i in req.nodes:
            if req.node_type[i] == tau and u in set(_typed_nodes(instance, i)):
                coeffs[name_y(i, u)] = req.node_demand.get(i, 0.0)
        prog.add_constraint(f"nload[{u}.{tau}]", coeffs, "=", 0.0)
    for uv in sub.edges:
        coeffs = {name_a_edge(*uv): -1.0}
        for e in sorted(edge_spaces):
            for m_e in edge_spaces[e]:
                key = name_a_edge_sub(uv, e, m_e)
                coeffs[key] = coeffs.get(key, 0.0) + 1.0
        prog.add_constraint(f"eload[{uv[0]}->{uv[1]}]", coeffs, "=", 0.0)

    _objective_from_costs(prog, instance)
    return prog


def build_adapted(
    instance: Instance,
    order: ExtractionOrder,
    labels: EdgeLabelAssignment,
    omega: LabelSetOrdering,
) -> LpProgram:
    """Adapted formulation for a single rooted extraction order.

    Rejects non-decomposable label assignments and invalid orderings up
    front; both would silently break the decomposition guarantee otherwise.
    """
    from .extraction import check_decomposable_labels
    from .orderings import validate_ordering

    label_report = check_decomposable_labels(order, labels)
    if not label_report.ok:
        raise LpBuildError(f"labels not decomposable: {label_report.failures[0]}")
    ordering_report = validate_ordering(order, labels, omega)
    if not ordering_report.ok:
        raise LpBuildError(f"invalid label set ordering: {ordering_report.failures[0]}")
    return build_adapted_regions(instance, labels, [RegionSpec(view=order, omega=omega)])


# ---------------------------------------------------------------------------
# lifting convex combinations into feasible assignments


def lift_convex_combination(
    instance: Instance,
    order: ExtractionOrder,
    labels: EdgeLabelAssignment,
    omega: LabelSetOrdering,
    combo: ConvexCombination,
) -> dict[str, float]:
    return lift_convex_combination_regions(
        instance, labels, [RegionSpec(view=order, omega=omega)], combo
    )


def lift_convex_combination_regions(
    instance: Instance,
    labels: EdgeLabelAssignment,
    regions: Sequence[RegionSpec],
    combo: ConvexCombination,
) -> dict[str, float]:
    """Feasible assignment of the adapted program from a complete convex
    combination of valid mappings (the solvability construction)."""
    if not combo.is_complete():
        raise LpBuildError(f"combination not complete: total {combo.total()}")
    for _, m in combo.entries:
        rep = validate_mapping(instance, m)
        if not rep.valid:
            raise LpBuildError(f"invalid mapping in combination: {rep.violations[0]}")

    req = instance.request
    out: dict[str, float] = {}

    def bump(name: str, f: float) -> None:
        out[name] = out.get(name, 0.0) + f

    for f, m in combo.entries:
        for i, u in m.node_map.items():
            bump(name_y(i, u), f)
        for spec in regions:
            for e in spec.view.edges:
                orig = spec.view.orig_edge(e)
                m_e = restrict(m.node_map, labels.of(e))
                for i in orig:
                    bump(name_y_sub(i, m.node_map[i], orig, m_e), f)
                for uv in m.edge_map[orig]:
                    bump(name_z_sub(orig, uv, m_e), f)
            for i in spec.view.nodes:
                for layer, s in enumerate(spec.omega.omega(i), start=1):
                    m_a = restrict(m.node_map, s)
                    bump(name_gamma(i, m.node_map[i], layer, m_a, spec.tag), f)

    # derive allocation variables from their defining constraints
    sub = instance.substrate
    for spec in regions:
        for e in spec.view.edges:
            orig = spec.view.orig_edge(e)
            t, h = orig
            taus = {req.node_type[t], req.node_type[h]} - {None}
            for m_e in mapping_space(instance, labels.of(e)):
                for (u, tau) in instance.node_resources():
                    if tau not in taus:
                        continue
                    val = 0.0
                    for i in (t, h):
                        if req.node_type[i] == tau:
                            val += req.node_demand.get(i, 0.0) * out.get(
                                name_y_sub(i, u, orig, m_e), 0.0
                            )
                    if val:
                        out[name_a_node_sub(u, tau, orig, m_e)] = val
                for uv in sub.edges:
                    val = req.edge_demand.get(orig, 0.0) * out.get(
                        name_z_sub(orig, uv, m_e), 0.0
                    )
                    if val:
                        out[name_a_edge_sub(uv, orig, m_e)] = val
    for (u, tau) in instance.node_resources():
        val = 0.0
        for i in req.nodes:
            if req.node_type[i] == tau:
                val += req.node_demand.get(i, 0.0) * out.get(name_y(i, u), 0.0)
        if val:
            out[name_a_node(u, tau)] = val
    for uv in sub.edges:
        val = 0.0
        for f, m in combo.entries:
            for e, path in m.edge_map.items():
                if uv in path:
                    val += f * req.edge_demand.get(e, 0.0)
        if val:
            out[name_a_edge(*uv)] = val
    return out


def lift_mcf(instance: Instance, combo: ConvexCombination) -> dict[str, float]:
    """Feasible MCF-relaxation assignment from a complete convex combination."""
    if not combo.is_complete():
        raise LpBuildError(f"combination not complete: total {combo.total()}")
    req = instance.request
    out: dict[str, float] = {}
    for f, m in combo.entries:
        rep = validate_mapping(instance, m)
        if not rep.valid:
            raise LpBuildError(f"invalid mapping in combination: {rep.violations[0]}")
        for i, u in m.node_map.items():
            out[name_y(i, u)] = out.get(name_y(i, u), 0.0) + f
        for e, path in m.edge_map.items():
            for uv in path:
                key = name_z_sub(e, uv, {})
                out[key] = out.get(key, 0.0) + f
    for (u, tau) in instance.node_resources():
        val = sum(
            req.node_demand.get(i, 0.0) * out.get(name_y(i, u), 0.0)
            for i in req.nodes
            if req.node_type[i] == tau
        )
        if val:
            out[name_a_node(u, tau)] = val
    for uv in instance.substrate.edges:
        val = sum(
            req.edge_demand.get(e, 0.0) * out.get(name_z_sub(e, uv, {}), 0.0)
            for e in req.edges
        )
        if val:
            out[name_a_edge(*uv)] = val
    return out


# ---------------------------------------------------------------------------
# feasibility checking


def check_feasible(
    program: LpProgram, assignment: TMapping[str, float], tolerance: float = 1e-9
) -> FeasibilityReport:
    """Evaluate all constraints and bounds; missing variables count as zero."""
    violated: list[str] = []
    worst = 0.0
    for v in program.variables:
        x = assignment.get(v.name, 0.0)
        resid = max(v.lb - x, x - v.ub, 0.0)
        if resid > tolerance:
            violated.append(f"bound {v.name} = {x} not in [{v.lb}, {v.ub}]")
        worst = max(worst, resid)
    for c in program.constraints:
        lhs = sum(coef * assignment.get(var, 0.0) for var, coef in c.coeffs.items())
        resid = abs(lhs - c.rhs) if c.relation == "=" else max(0.0, lhs - c.rhs)
        if resid > tolerance:
            violated.append(f"constraint {c.name}: lhs {lhs} {c.relation} {c.rhs}")
        worst = max(worst, resid)
    return FeasibilityReport(feasible=not violated, max_residual=worst, violated=tuple(violated))


# ---------------------------------------------------------------------------
# LP text format


def _fmt_terms(coeffs: TMapping[str, float]) -> str:
    parts = []
    for var in sorted(coeffs):
        c = coeffs[var]
        if c == 0:
            continue
        sign = "-" if c < 0 else "+"
        parts.append(f"{sign} {abs(c):.12g} {var}")
    return " ".join(parts) if parts else "+ 0 __zero__"


def export_lp(program: LpProgram) -> str:
    """Emit the program in LP text form (Minimize / Subject To / Bounds / End).

    Terms are space-separated "sign coefficient name" triples so canonical
    names survive re-parsing.
    """
    lines = []
    lines.append("Minimize" if program.sense == "min" else "Maximize")
    lines.append(f" obj: {_fmt_terms(program.objective)}")
    lines.append("Subject To")
    for c in program.constraints:
        rel = "=" if c.relation == "=" else "<="
        lines.append(f" {c.name}: {_fmt_terms(c.coeffs)} {rel} {c.rhs:.12g}")
    lines.append("Bounds")
    for v in program.variables:
        ub = "inf" if v.ub == INF else f"{v.ub:.12g}"
        lines.append(f" {v.lb:.12g} <= {v.name} <= {ub}")
    lines.append("End")
    return "\n".join(lines) + "\n"


def parse_lp(text: str) -> LpProgram:
    """Parse the export_lp format back into a program."""
    prog = LpProgram(comment="parsed")
    section = None
    pending_bounds: list[tuple[float, str, float]] = []
    rows: list[tuple[str, dict[str, float], str, float]] = []
    objective: dict[str, float] = {}
    sense = "min"
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        low = line.lower()
        if low in ("minimize", "maximize"):
            section = "obj"
            sense = "min" if low == "minimize" else "max"
            continue
        if low == "subject to":
            section = "cons"
            continue
        if low == "bounds":
            section = "bounds"
            continue
        if low == "end":
            break
        if section in ("obj", "cons"):
            # the label is the first whitespace-free token and ends with a
            # colon; names themselves may contain colons inside mappings
            first, _, rest = line.partition(" ")
            if not first.endswith(":"):
                raise LpBuildError(f"missing label in line {line!r}")
            label = first[:-1]
            tokens = rest.split()
            coeffs: dict[str, float] = {}
            relation, rhs = None, 0.0
            idx = 0
            while idx < len(tokens):
                tok = tokens[idx]
                if tok in ("=", "<="):
                    relation = tok
                    rhs = float(tokens[idx + 1])
                    idx += 2
                    continue
                sign = 1.0
                if tok == "+":
                    sign = 1.0
                elif tok == "-":
                    sign = -1.0
                else:
                    raise LpBuildError(f"expected sign, got {tok!r} in {line!r}")
                coef = float(tokens[idx + 1])
                var = tokens[idx + 2]
                if var != "__zero__":
                    coeffs[var] = coeffs.get(var, 0.0) + sign * coef
                idx += 3
            if section == "obj":
                objective = coeffs
            else:
                rows.append((label, coeffs, relation or "=", rhs))
        elif section == "bounds":
            tokens = line.split()
            if len(tokens) != 5 or tokens[1] != "<=" or tokens[3] != "<=":
                raise LpBuildError(f"bad bounds line {line!r}")
            lb = float(tokens[0])
            ub = INF if tokens[4] == "inf" else float(tokens[4])
            pending_bounds.append((lb, tokens[2], ub))
    for (lb, nm, ub) in pending_bounds:
        prog.add_var(nm, lb, ub)
    known = {v.name for v in prog.variables}
    for nm in sorted(set(objective) | {v for (_, cs, _, _) in rows for v in cs}):
        if nm not in known:
            prog.add_var(nm, 0.0, INF)
            known.add(nm)
    for (label, coeffs, relation, rhs) in rows:
        prog.add_constraint(label, coeffs, relation, rhs)
    prog.objective = objective
    prog.sense = sense
    return prog
