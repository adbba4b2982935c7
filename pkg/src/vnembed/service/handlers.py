"""Service-layer handlers: the solve pipeline and its sibling operations.

Handlers take and return the pydantic models from schemas; the FastAPI app
and the command line are both thin clients of these functions.
"""

from __future__ import annotations

import logging

from ..decompose import (
    best_mapping,
    decompose_adapted,
    decompose_mcf,
    verify_convex_combination,
)
from ..errors import InstanceError
from ..extraction import confluence_edge_labels, order_from_document, orient_bfs
from ..generators import GENERATORS
from ..instance import (
    ConvexCombination,
    Instance,
    MappingResult,
    load_instance,
    mapping_cost,
    project_mapping,
)
from ..lp import LpProgram, build_adapted, build_adapted_regions, build_mcf, export_lp
from ..multiroot import (
    GeneralizedOrder,
    collapse_cycles,
    decompose_multiroot,
    multiroot_confluence_labels,
    multiroot_orderings,
    orient_multi_source,
    partition_root_regions,
    region_report,
    region_specs,
    root_region_order,
)
from ..oracle import OracleBudget, enumerate_valid_mappings, oracle_best
from ..orderings import (
    auto_label_set_ordering,
    bag_label_set_ordering,
    width_report,
)
from ..simplex import solve as lp_solve
from .schemas import (
    GenerateRequest,
    GenerateResponse,
    MappingModel,
    OracleRequest,
    OracleResponse,
    SolveRequest,
    SolveResponse,
    ValidateRequest,
    ValidateResponse,
    WidthReportModel,
    WidthsRequest,
    WidthsResponse,
)

logger = logging.getLogger("vnembed")


def _instance_of(model) -> Instance:
    return load_instance(model.to_document())


def _mapping_model(instance: Instance, m: MappingResult) -> MappingModel:
    return MappingModel(
        node_map=dict(m.node_map),
        edge_map={
            f"{i}->{j}": [f"{u}->{v}" for (u, v) in path]
            for (i, j), path in sorted(m.edge_map.items())
        },
        cost=mapping_cost(instance, m),
    )


def _combination_models(combo: ConvexCombination) -> list:
    from .schemas import CombinationEntryModel

    return [
        CombinationEntryModel(
            value=f,
            node_map=dict(m.node_map),
            edge_map={
                f"{i}->{j}": [f"{u}->{v}" for (u, v) in path]
                for (i, j), path in sorted(m.edge_map.items())
            },
        )
        for f, m in combo.entries
    ]


def handle_validate(req: ValidateRequest) -> ValidateResponse:
    try:
        _instance_of(req.instance)
    except InstanceError as exc:
        return ValidateResponse(valid=False, errors=[str(exc)])
    return ValidateResponse(valid=True)


def _orientation_order(orientation, instance: Instance):
    """ExtractionOrder from an orientation document, or None when absent or
    not rooted (multi-root documents carry 'roots')."""
    if orientation is None or orientation.root is None:
        return None
    doc = orientation.model_dump()
    return order_from_document(doc, instance.request)


def handle_widths(req: WidthsRequest) -> WidthsResponse:
    instance = _instance_of(req.instance)
    roots = req.roots or list(instance.request.nodes)
    builder = auto_label_set_ordering if req.ordering == "auto" else bag_label_set_ordering
    doc_order = _orientation_order(req.orientation, instance)
    reports = []
    for root in roots:
        if doc_order is not None and doc_order.root == root:
            order = doc_order
        else:
            order = orient_bfs(instance.request, root)
        labels = confluence_edge_labels(order)
        omega = builder(order, labels)
        reports.append(WidthReportModel(**width_report(order, labels, omega)))
    return WidthsResponse(ordering=req.ordering, reports=reports)


def _ordering_builder(mode: str):
    return auto_label_set_ordering if mode == "auto" else bag_label_set_ordering


def handle_solve(req: SolveRequest) -> SolveResponse:
    instance = _instance_of(req.instance)
    roots = req.roots or [instance.request.nodes[0]]
    for r in roots:
        if r not in set(instance.request.nodes):
            raise InstanceError(f"root {r!r} is not a request node")

    # cycle collapsing may augment the instance with virtual elements; keep
    # the user's own request around to project them out of the response
    original = instance
    regions_report = None
    program: LpProgram
    if req.formulation == "mcf":
        if not instance.request.is_tree():
            raise InstanceError(
                "mcf decomposition requires a tree request; use --formulation adapted"
            )
        doc_order = _orientation_order(req.orientation, instance)
        if doc_order is not None and (req.roots is None or doc_order.root == roots[0]):
            order = doc_order
        else:
            order = orient_bfs(instance.request, roots[0])
        program = build_mcf(instance)
        decomposer = lambda assignment: decompose_mcf(instance, order, assignment)
    elif req.formulation == "adapted":
        doc_order = _orientation_order(req.orientation, instance)
        if doc_order is not None and (req.roots is None or doc_order.root == roots[0]):
            order = doc_order
        else:
            order = orient_bfs(instance.request, roots[0])
        labels = confluence_edge_labels(order)
        omega = _ordering_builder(req.ordering)(order, labels)
        program = build_adapted(instance, order, labels, omega)
        decomposer = lambda assignment: decompose_adapted(
            instance, order, labels, omega, assignment
        )
    else:  # multiroot
        if req.orientation is not None and req.orientation.roots:
            edges = [(e.tail, e.head) for e in req.orientation.edges]
            rev = frozenset(
                (e.tail, e.head) for e in req.orientation.edges if e.reversed
            )
            g = GeneralizedOrder(
                nodes=tuple(sorted({v for e in edges for v in e})),
                edges=tuple(sorted(edges)),
                reversed_edges=rev,
            )
            wanted = req.orientation.roots[0]
        else:
            g = orient_multi_source(instance.request, roots)
            wanted = roots[0]
        regions = partition_root_regions(g)
        rr = root_region_order(g, regions, wanted if wanted in g.roots else g.roots[0])
        if not rr.tree_like:
            instance, g, regions, rr = collapse_cycles(instance, g, regions, rr)
        labels = multiroot_confluence_labels(g, regions)
        omega = multiroot_orderings(g, regions, labels, mode=req.ordering)
        specs = region_specs(g, regions, omega)
        program = build_adapted_regions(instance, labels, specs)
        regions_report = region_report(g, regions, rr, omega, labels)
        decomposer = lambda assignment: decompose_multiroot(
            instance, g, regions, rr, omega, assignment, labels
        )

    logger.info(
        "solving %s program: %d variables, %d constraints",
        req.formulation,
        len(program.variables),
        len(program.constraints),
    )
    solution = lp_solve(program)
    response = SolveResponse(
        status=solution.status,
        objective=solution.objective,
        message=solution.message,
        lp_variables=len(program.variables),
        lp_constraints=len(program.constraints),
        lp_text=export_lp(program) if req.include_lp_text else None,
        regions=regions_report,
    )
    if solution.status != "optimal":
        return response

    combo = decomposer(dict(solution.assignment))
    report = verify_convex_combination(instance, combo, solution.assignment, req.tolerance)
    if instance is not original:
        combo = ConvexCombination(
            entries=tuple(
                (
                    f,
                    project_mapping(m, original.request.nodes, original.request.edges),
                )
                for f, m in combo.entries
            )
        )
    response.combination = _combination_models(combo)
    response.verified = report.ok
    response.verify_failures = list(report.failures)
    pick = best_mapping(original, combo)
    if pick is not None:
        response.best_mapping = _mapping_model(original, pick[0])
    return response


def handle_oracle(req: OracleRequest) -> OracleResponse:
    instance = _instance_of(req.instance)
    budget = OracleBudget(
        max_node_combinations=req.max_node_combinations,
        max_path_hops=req.max_path_hops,
    )
    mappings = enumerate_valid_mappings(instance, budget)
    best = oracle_best(instance, budget)
    return OracleResponse(
        mapping_count=len(mappings),
        capacity_respecting_count=sum(1 for em in mappings if em.respects_capacities),
        best_mapping=_mapping_model(instance, best[0]) if best else None,
    )


def handle_generate(req: GenerateRequest) -> GenerateResponse:
    kind = req.kind
    if kind == "half-wheel":
        doc = GENERATORS[kind](req.n, substrate_nodes=req.substrate_nodes, root=req.root)
    elif kind == "two-half-wheels":
        doc = GENERATORS[kind](req.n, substrate_nodes=req.substrate_nodes)
    elif kind in ("tree", "cactus"):
        if req.seed is None:
            raise InstanceError(f"generator {kind!r} requires a seed")
        doc = GENERATORS[kind](req.n, seed=req.seed, substrate_nodes=req.substrate_nodes)
    else:  # hypergraph-eo
        if not req.sets:
            raise InstanceError("hypergraph-eo requires 'sets'")
        doc = GENERATORS[kind](req.sets, substrate_nodes=req.substrate_nodes)
    return GenerateResponse(instance=doc["instance"], orientation=doc["orientation"])
