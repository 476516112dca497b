"""
Domain types for a two-datacenter data-parallel training scenario.

Models only check field types on construction. Range invariants live in
:mod:`geo_overlap_sim.validators` so that every violation can be reported
at once.
"""
from enum import Enum
from typing import Dict, Optional

from pydantic import BaseModel, ConfigDict

SMF_SPEED_MPS = 2.0e8
HCF_SPEED_MPS = 3.0e8

BASELINE_DISTANCE_M = 300.0


class FiberKind(Enum):
    SMF = "smf"
    HCF = "hcf"


DEFAULT_FIBER_SPEEDS: Dict[FiberKind, float] = {
    FiberKind.SMF: SMF_SPEED_MPS,
    FiberKind.HCF: HCF_SPEED_MPS,
}


class FiberType(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: FiberKind
    propagation_speed: float

    @classmethod
    def of(cls, kind: FiberKind, propagation_speed: Optional[float] = None) -> "FiberType":
        """Fiber preset, optionally with an explicit speed override."""
        speed = DEFAULT_FIBER_SPEEDS[kind] if propagation_speed is None else propagation_speed
        return cls(kind=kind, propagation_speed=speed)

    @classmethod
    def smf(cls) -> "FiberType":
        return cls.of(FiberKind.SMF)

    @classmethod
    def hcf(cls) -> "FiberType":
        return cls.of(FiberKind.HCF)


class GpuSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    peak_flops: float


class ModelSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    parameter_count: int
    layer_count: int
    grad_bytes_per_param: int = 2

    @property
    def gradient_bytes(self) -> int:
        return self.parameter_count * self.grad_bytes_per_param


class TopologySpec(BaseModel):
    """Two lumped datacenters joined by one long-haul link."""

    model_config = ConfigDict(frozen=True)

    dc_count: int = 2
    gpus_per_dc: int
    intra_bandwidth: float = 600e9
    intra_latency: float = 1e-6
    inter_bandwidth: float = 100e9
    inter_distance: float
    fiber: FiberType

    @property
    def total_gpus(self) -> int:
        return self.dc_count * self.gpus_per_dc


class JobConfig(BaseModel):
    """One fully resolved simulation scenario."""

    model_config = ConfigDict(frozen=True)

    model: ModelSpec
    gpu: GpuSpec
    topology: TopologySpec
    tokens_per_gpu: int = 8192
    bucket_bytes: int = 25_000_000
    optimizer_step_seconds: float = 0.0
    inter_traversals: int = 1
    compute_efficiency: float = 1.0
    quantum_ps: int = 1

    @property
    def total_gpus(self) -> int:
        return self.topology.total_gpus

    def label(self) -> str:
        topo = self.topology
        return (
            f"{self.model.name}_{self.gpu.name}_{topo.fiber.kind.value}"
            f"_{self.total_gpus}gpu_{topo.inter_distance:g}m_{topo.inter_bandwidth:g}Bps"
        )


MODEL_PRESETS: Dict[str, ModelSpec] = {
    "gpt3-13b": ModelSpec(name="gpt3-13b", parameter_count=13_000_000_000, layer_count=40),
    "gpt3-175b": ModelSpec(name="gpt3-175b", parameter_count=175_000_000_000, layer_count=96),
}

GPU_PRESETS: Dict[str, GpuSpec] = {
    "a100": GpuSpec(name="a100", peak_flops=312e12),
    "h100": GpuSpec(name="h100", peak_flops=989e12),
}

FIBER_PRESETS: Dict[str, FiberKind] = {kind.value: kind for kind in FiberKind}

# scenario sizes of the default grids (both datacenters together)
SCENARIO_TOTAL_GPUS = (256, 2048, 8192)
