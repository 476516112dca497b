"""Point-to-point communication time: serialization plus propagation."""
from dataclasses import dataclass
from fractions import Fraction
import math

from pydantic import BaseModel, ConfigDict, Field

from .models import FiberType, TopologySpec
from .utils import Number, ps_to_seconds, seconds_to_ps, to_fraction


class LinkSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    # math.inf bandwidth is the communication-free limit
    bandwidth: float = Field(gt=0)
    distance: float = Field(default=0.0, ge=0)
    fiber: FiberType
    fixed_latency: float = Field(default=0.0, ge=0)


@dataclass(frozen=True)
class CommTime:
    serialization_ps: int
    propagation_ps: int

    @property
    def total_ps(self) -> int:
        return self.serialization_ps + self.propagation_ps

    @property
    def total(self) -> float:
        return ps_to_seconds(self.total_ps)


def propagation_delay_exact(distance: Number, fiber: FiberType) -> Fraction:
    """D / v in seconds, as an exact rational."""
    if distance < 0:
        raise ValueError(f"distance must be >= 0, got {distance}")
    return to_fraction(distance) / to_fraction(fiber.propagation_speed)


def propagation_delay(distance: Number, fiber: FiberType, quantum_ps: int = 1) -> int:
    """D / v in picoseconds, rounded up to the time quantum."""
    return seconds_to_ps(propagation_delay_exact(distance, fiber), quantum_ps)


def serialization_exact(nbytes: int, bandwidth: float) -> Fraction:
    if nbytes < 0:
        raise ValueError(f"bytes must be >= 0, got {nbytes}")
    if math.isinf(bandwidth):
        return Fraction(0)
    return Fraction(nbytes) / to_fraction(bandwidth)


def transfer_time(nbytes: int, link: LinkSpec, quantum_ps: int = 1) -> CommTime:
    """M/B + (fixed latency + D/v), each component rounded up separately."""
    serialization = serialization_exact(nbytes, link.bandwidth)
    propagation = to_fraction(link.fixed_latency) + propagation_delay_exact(link.distance, link.fiber)
    return CommTime(
        seconds_to_ps(serialization, quantum_ps),
        seconds_to_ps(propagation, quantum_ps),
    )


def equivalent_distance(
    distance_hcf: Number,
    hcf: FiberType = FiberType.hcf(),
    smf: FiberType = FiberType.smf(),
) -> float:
    """SMF distance with the same propagation delay as ``distance_hcf`` of HCF."""
    if distance_hcf < 0:
        raise ValueError(f"distance must be >= 0, got {distance_hcf}")
    ratio = to_fraction(smf.propagation_speed) / to_fraction(hcf.propagation_speed)
    return float(to_fraction(distance_hcf) * ratio)


def latency_saving(
    distance: Number,
    hcf: FiberType = FiberType.hcf(),
    smf: FiberType = FiberType.smf(),
) -> float:
    """Fractional propagation-delay reduction of HCF over SMF at one distance."""
    if distance == 0:
        return 0.0
    return float(1 - propagation_delay_exact(distance, hcf) / propagation_delay_exact(distance, smf))


def intra_link(topology: TopologySpec) -> LinkSpec:
    # the lumped node has no long-haul span; only the fixed fabric latency applies
    return LinkSpec(
        bandwidth=topology.intra_bandwidth,
        distance=0.0,
        fiber=topology.fiber,
        fixed_latency=topology.intra_latency,
    )


def inter_link(topology: TopologySpec) -> LinkSpec:
    return LinkSpec(
        bandwidth=topology.inter_bandwidth,
        distance=topology.inter_distance,
        fiber=topology.fiber,
        fixed_latency=0.0,
    )
