"""
Per-layer compute durations and gradient buckets for one training iteration.

Dense-transformer rule: 6 FLOPs per parameter per token, 2 in the forward
pass and 4 in the backward pass, split uniformly across layers. Gradient
bytes are split uniformly too and bucketed in backward order (last layer
first).
"""
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Tuple
import logging

from .exceptions import WorkloadError
from .models import GpuSpec, JobConfig, ModelSpec
from .utils import U64_MAX, ps_to_seconds, seconds_to_ps

logger = logging.getLogger(__name__)

FORWARD_FLOPS_PER_PARAM_TOKEN = 2
BACKWARD_FLOPS_PER_PARAM_TOKEN = 4


@dataclass(frozen=True)
class LayerTiming:
    layer_index: int
    forward_ps: int
    backward_ps: int


@dataclass(frozen=True)
class Bucket:
    bucket_index: int
    bytes: int
    # model layer whose backward completion fills this bucket
    ready_after_layer: int


@dataclass(frozen=True)
class WorkloadPlan:
    layers: Tuple[LayerTiming, ...]
    buckets: Tuple[Bucket, ...]
    total_compute_ps: int

    @property
    def total_compute_seconds(self) -> float:
        return ps_to_seconds(self.total_compute_ps)

    @property
    def forward_ps(self) -> int:
        return sum(layer.forward_ps for layer in self.layers)


def flops_split(model: ModelSpec, tokens_per_gpu: int) -> Tuple[int, int]:
    """Forward and backward FLOPs of one iteration on one GPU."""
    if tokens_per_gpu < 1:
        raise WorkloadError(f"tokens_per_gpu must be >= 1, got {tokens_per_gpu}")
    forward = FORWARD_FLOPS_PER_PARAM_TOKEN * model.parameter_count * tokens_per_gpu
    backward = BACKWARD_FLOPS_PER_PARAM_TOKEN * model.parameter_count * tokens_per_gpu
    if forward + backward > U64_MAX:
        raise WorkloadError(
            f"{model.name} x {tokens_per_gpu} tokens overflows the 64-bit FLOP counter"
        )
    return forward, backward


def flops_per_iteration(model: ModelSpec, tokens_per_gpu: int) -> int:
    forward, backward = flops_split(model, tokens_per_gpu)
    return forward + backward


def build_layer_timings(
    model: ModelSpec,
    gpu: GpuSpec,
    tokens_per_gpu: int,
    efficiency: float = 1.0,
    quantum_ps: int = 1,
) -> List[LayerTiming]:
    """
    Uniform per-layer forward/backward durations at peak (or derated) FLOPS.

    The forward share is rounded up to the time quantum; backward is exactly
    twice the quantized forward duration.
    """
    forward_flops, _ = flops_split(model, tokens_per_gpu)
    rate = Fraction(gpu.peak_flops) * Fraction(efficiency)
    per_layer = Fraction(forward_flops, model.layer_count) / rate
    forward_ps = seconds_to_ps(per_layer, quantum_ps)
    backward_ps = 2 * forward_ps
    if (forward_ps + backward_ps) * model.layer_count > U64_MAX:
        raise WorkloadError(f"compute time of {model.name} overflows the 64-bit picosecond clock")
    return [LayerTiming(i, forward_ps, backward_ps) for i in range(model.layer_count)]


def build_buckets(model: ModelSpec, bucket_bytes: int) -> List[Bucket]:
    """
    Split the gradient bytes into fixed-size buckets in backward order.

    A bucket is ready after the layer whose gradients first bring the
    cumulative byte count (counted from the last layer) up to the bucket's
    end boundary. The final bucket holds the remainder.
    """
    total = model.gradient_bytes
    layers = model.layer_count
    if bucket_bytes <= 0:
        raise WorkloadError(f"bucket_bytes must be positive, got {bucket_bytes}")

    buckets: List[Bucket] = []
    step = 0
    start = 0
    index = 0
    while start < total:
        end = min(start + bucket_bytes, total)
        # cumulative bytes after backward step k is floor(total * (k + 1) / layers)
        while total * (step + 1) // layers < end:
            step += 1
        buckets.append(Bucket(index, end - start, layers - 1 - step))
        start = end
        index += 1
    logger.debug("%s: %d bucket(s) of %d bytes", model.name, len(buckets), bucket_bytes)
    return buckets


def build_workload(config: JobConfig) -> WorkloadPlan:
    layers = build_layer_timings(
        config.model,
        config.gpu,
        config.tokens_per_gpu,
        config.compute_efficiency,
        config.quantum_ps,
    )
    buckets = build_buckets(config.model, config.bucket_bytes)
    total = sum(layer.forward_ps + layer.backward_ps for layer in layers)
    return WorkloadPlan(tuple(layers), tuple(buckets), total)
