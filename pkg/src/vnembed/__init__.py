"""vnembed: single-request virtual network embedding toolkit.

Builds the multi-commodity-flow relaxation and its label-set-ordering
refinement for VNEP instances, solves them with a bundled simplex, and
decomposes fractional solutions into convex combinations of valid mappings,
including the multi-root variant.
"""

__version__ = "0.1.0"

from .instance import (  # noqa: F401
    ConvexCombination,
    Instance,
    MappingResult,
    RequestGraph,
    SubstrateGraph,
    allocations,
    load_instance,
    mapping_cost,
    project_mapping,
    validate_mapping,
)
from .extraction import (  # noqa: F401
    EdgeLabelAssignment,
    ExtractionOrder,
    check_decomposable_labels,
    confluence_edge_labels,
    label_induced_subgraph,
    orient_bfs,
)
from .orderings import (  # noqa: F401
    LabelSetOrdering,
    SetFamily,
    auto_label_set_ordering,
    bag_label_set_ordering,
    edge_bags,
    extraction_label_width,
    extraction_width,
    hypergraph_extraction_order,
    join_tree,
    label_set_graph,
    running_intersection_ordering,
    validate_ordering,
)
