"""Pydantic request/response models for the solve service and the CLI."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field


class SubstrateNodeModel(BaseModel):
    id: str
    types: list[str]
    capacity: dict[str, float]


class SubstrateEdgeModel(BaseModel):
    tail: str
    head: str
    capacity: float


class SubstrateModel(BaseModel):
    nodes: list[SubstrateNodeModel]
    edges: list[SubstrateEdgeModel]


class RequestNodeModel(BaseModel):
    id: str
    type: str
    demand: float = 0.0


class RequestEdgeModel(BaseModel):
    tail: str
    head: str
    demand: float = 0.0


class RequestModel(BaseModel):
    nodes: list[RequestNodeModel]
    edges: list[RequestEdgeModel]


class CostsModel(BaseModel):
    node: dict[str, float] = Field(default_factory=dict)
    edge: dict[str, float] = Field(default_factory=dict)


class InstanceModel(BaseModel):
    substrate: SubstrateModel
    request: RequestModel
    costs: Optional[CostsModel] = None

    def to_document(self) -> dict:
        doc = self.model_dump(exclude_none=True)
        return doc


class OrientationEdgeModel(BaseModel):
    tail: str
    head: str
    reversed: bool = False
    labels: list[str] = Field(default_factory=list)


class OrientationModel(BaseModel):
    root: Optional[str] = None
    roots: Optional[list[str]] = None
    edges: list[OrientationEdgeModel]


class ValidateRequest(BaseModel):
    instance: InstanceModel


class ValidateResponse(BaseModel):
    valid: bool
    errors: list[str] = Field(default_factory=list)


class WidthsRequest(BaseModel):
    instance: InstanceModel
    roots: Optional[list[str]] = None  # default: sweep every node
    ordering: Literal["bag", "auto"] = "auto"
    orientation: Optional[OrientationModel] = None  # used for its matching root


class WidthReportModel(BaseModel):
    root: str
    extraction_width: int
    extraction_label_width: int
    per_node: list[dict]


class WidthsResponse(BaseModel):
    ordering: str
    reports: list[WidthReportModel]


class SolveRequest(BaseModel):
    instance: InstanceModel
    formulation: Literal["mcf", "adapted", "multiroot"] = "adapted"
    roots: Optional[list[str]] = None
    ordering: Literal["bag", "auto"] = "auto"
    tolerance: float = 1e-7
    include_lp_text: bool = False
    orientation: Optional[OrientationModel] = None


class CombinationEntryModel(BaseModel):
    value: float
    node_map: dict[str, str]
    edge_map: dict[str, list[str]]  # "i->j" -> ["u->v", ...]


class MappingModel(BaseModel):
    node_map: dict[str, str]
    edge_map: dict[str, list[str]]
    cost: float


class SolveResponse(BaseModel):
    status: str
    objective: Optional[float] = None
    message: str = ""
    lp_variables: int = 0
    lp_constraints: int = 0
    combination: list[CombinationEntryModel] = Field(default_factory=list)
    best_mapping: Optional[MappingModel] = None
    verified: Optional[bool] = None
    verify_failures: list[str] = Field(default_factory=list)
    lp_text: Optional[str] = None
    regions: Optional[dict] = None  # multiroot region report


class OracleRequest(BaseModel):
    instance: InstanceModel
    max_path_hops: int = 4
    max_node_combinations: int = 200_000


class OracleResponse(BaseModel):
    mapping_count: int
    capacity_respecting_count: int
    best_mapping: Optional[MappingModel] = None


class GenerateRequest(BaseModel):
    kind: Literal["half-wheel", "cactus", "tree", "two-half-wheels", "hypergraph-eo"]
    n: int = 5
    seed: Optional[int] = None
    substrate_nodes: int = 3
    root: Literal["center", "outer"] = "center"
    sets: Optional[list[list[str]]] = None


class GenerateResponse(BaseModel):
    instance: dict
    orientation: Optional[dict] = None
