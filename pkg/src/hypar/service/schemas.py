"""Pydantic request/response models for the planner service."""
from typing import List, Optional

from pydantic import BaseModel, Field


class ModelSource(BaseModel):
    """A network to operate on: a zoo name or inline model-file text."""

    zoo: Optional[str] = None
    text: Optional[str] = None
    batch: Optional[int] = Field(default=None, ge=1)


class ShapesRequest(BaseModel):
    model: ModelSource


class LayerShapeInfo(BaseModel):
    layer: int
    kind: str
    in_channels: int
    out_channels: int
    elems_input: int
    elems_weight: int
    elems_raw_output: int
    elems_output: int
    flops_forward: int
    flops_backward: int
    flops_gradient: int


class ShapesResponse(BaseModel):
    network: str
    batch: int
    precision_bytes: int
    layers: List[LayerShapeInfo]


class PartitionRequest(BaseModel):
    model: ModelSource
    levels: int = Field(default=4, ge=0)
    mode: str = "paper-literal"


class PlanResponse(BaseModel):
    network: str
    levels: int
    rows: List[List[str]]
    total_elements: int
    total_bytes: int
    mode: str


class BruteForceRequest(BaseModel):
    model: ModelSource


class BruteForceResponse(BaseModel):
    network: str
    plan: List[str]
    total_elements: int
    total_bytes: int
    matches_linear_search: bool


class HardwareOverrides(BaseModel):
    model_config = {"extra": "forbid"}

    compute_throughput: Optional[float] = None
    clock: Optional[float] = None
    dram_bandwidth: Optional[float] = None
    dram_capacity: Optional[float] = None
    link_bandwidth: Optional[float] = None
    energy_add32: Optional[float] = None
    energy_mult32: Optional[float] = None
    energy_sram32: Optional[float] = None
    energy_dram32: Optional[float] = None
    energy_remote32: Optional[float] = None
    sram_reuse: Optional[float] = None
    precision_bytes: Optional[int] = None

    def as_dict(self) -> dict:
        return {k: v for k, v in self.model_dump().items() if v is not None}


class SimulateRequest(BaseModel):
    model: ModelSource
    levels: int = Field(default=4, ge=0)
    plan: str = "hypar"  # dp | mp | trick | hypar
    rows: Optional[List[List[str]]] = None  # explicit matrix overrides `plan`
    mode: str = "paper-literal"
    topology: str = "htree"
    steps: int = Field(default=1, ge=1)
    hardware: Optional[HardwareOverrides] = None


class PhaseRowInfo(BaseModel):
    layer: int
    phase: str
    compute_time: float
    comm_time: float
    comm_bytes: int


class SimulateResponse(BaseModel):
    network: str
    topology: str
    node_count: int
    steps: int
    plan: PlanResponse
    step_time: float
    energy_joules: float
    comm_bytes: int
    total_flops: int
    per_layer: List[PhaseRowInfo]


class CompareRequest(BaseModel):
    model: ModelSource
    baselines: List[str] = Field(default=["dp", "hypar"], min_length=2)
    levels: int = Field(default=4, ge=0)
    mode: str = "paper-literal"
    topology: str = "htree"
    hardware: Optional[HardwareOverrides] = None


class CompareRow(BaseModel):
    baseline: str
    step_time: float
    energy_joules: float
    comm_bytes: int
    speedup_vs_dp: float
    energy_efficiency_vs_dp: float


class CompareResponse(BaseModel):
    network: str
    levels: int
    topology: str
    rows: List[CompareRow]


class SweepRequest(BaseModel):
    model: ModelSource
    axis: str  # nodes | batch | topology
    values: List[str] = Field(min_length=1)
    baselines: List[str] = Field(default=["dp", "hypar"], min_length=1)
    levels: int = Field(default=4, ge=0)
    mode: str = "paper-literal"
    topology: str = "htree"
    hardware: Optional[HardwareOverrides] = None


class SweepRow(BaseModel):
    axis: str
    value: str
    baseline: str
    node_count: int
    step_time: float
    energy_joules: float
    comm_bytes: int
    speedup_vs_single: Optional[float] = None


class SweepResponse(BaseModel):
    network: str
    axis: str
    rows: List[SweepRow]


class ZooEntryInfo(BaseModel):
    name: str
    weighted_layers: int
    batch: int


class ZooListResponse(BaseModel):
    networks: List[ZooEntryInfo]


class ZooShowResponse(BaseModel):
    name: str
    weighted_layers: int
    text: str
