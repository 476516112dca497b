from dataclasses import dataclass
from typing import Any, Callable, List, Optional, Sequence
import logging
import math

from .exceptions import ConfigValidationError
from .models import JobConfig

logger = logging.getLogger(__name__)

MIN_BUCKET_BYTES = 1_000_000
MAX_BUCKET_BYTES = 100_000_000
GRAD_BYTE_WIDTHS = (1, 2, 4)


@dataclass(frozen=True)
class Violation:
    field: str
    constraint: str
    actual: Any

    def __str__(self) -> str:
        return f"{self.field}: expected {self.constraint}, got {self.actual!r}"


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool) and not math.isnan(value)


class ConfigValidator:
    """
    Checks every JobConfig invariant and collects all violations.

    Args:
        scenario_sizes: when given, total GPU count must be one of these
            (used for the default sweeps)
    """

    def __init__(self, scenario_sizes: Optional[Sequence[int]] = None):
        self.scenario_sizes = tuple(scenario_sizes) if scenario_sizes else None

    def collect_violations(self, config: JobConfig) -> List[Violation]:
        found: List[Violation] = []

        def check(field: str, value: Any, constraint: str, ok: Callable[[Any], bool]) -> None:
            if not _is_number(value) or not ok(value):
                found.append(Violation(field, constraint, value))

        finite = math.isfinite
        model, gpu, topo = config.model, config.gpu, config.topology

        check("model.parameter_count", model.parameter_count, ">0", lambda v: v > 0)
        check("model.layer_count", model.layer_count, ">=1", lambda v: v >= 1)
        check(
            "model.grad_bytes_per_param",
            model.grad_bytes_per_param,
            "in {1, 2, 4}",
            lambda v: v in GRAD_BYTE_WIDTHS,
        )
        check("gpu.peak_flops", gpu.peak_flops, ">0", lambda v: v > 0 and finite(v))
        check("topology.dc_count", topo.dc_count, "==2", lambda v: v == 2)
        check("topology.gpus_per_dc", topo.gpus_per_dc, ">=1", lambda v: v >= 1)
        # infinite bandwidth is the communication-free limit
        check("topology.intra_bandwidth", topo.intra_bandwidth, ">0", lambda v: v > 0)
        check("topology.inter_bandwidth", topo.inter_bandwidth, ">0", lambda v: v > 0)
        check("topology.intra_latency", topo.intra_latency, ">=0", lambda v: 0 <= v and finite(v))
        check(
            "topology.inter_distance", topo.inter_distance, ">=0", lambda v: 0 <= v and finite(v)
        )
        check(
            "topology.fiber.propagation_speed",
            topo.fiber.propagation_speed,
            ">0",
            lambda v: v > 0 and finite(v),
        )
        check("tokens_per_gpu", config.tokens_per_gpu, ">=1", lambda v: v >= 1)
        check(
            "bucket_bytes",
            config.bucket_bytes,
            f">={MIN_BUCKET_BYTES:.0e} and <={MAX_BUCKET_BYTES:.0e}",
            lambda v: MIN_BUCKET_BYTES <= v <= MAX_BUCKET_BYTES,
        )
        check(
            "optimizer_step_seconds",
            config.optimizer_step_seconds,
            ">=0",
            lambda v: 0 <= v and finite(v),
        )
        check("inter_traversals", config.inter_traversals, ">=1", lambda v: v >= 1)
        check(
            "compute_efficiency", config.compute_efficiency, ">0 and <=1", lambda v: 0 < v <= 1
        )
        check("quantum_ps", config.quantum_ps, ">=1", lambda v: v >= 1)

        if self.scenario_sizes is not None:
            sizes = self.scenario_sizes
            check(
                "total_gpus",
                topo.dc_count * topo.gpus_per_dc,
                f"in {sorted(sizes)}",
                lambda v: v in sizes,
            )
        return found

    def validate(self, config: JobConfig) -> JobConfig:
        """Return config unchanged, or raise with every violated invariant."""
        violations = self.collect_violations(config)
        if violations:
            logger.debug("config %s failed %d check(s)", config.label(), len(violations))
            raise ConfigValidationError(violations)
        return config


def validate(config: JobConfig, scenario_sizes: Optional[Sequence[int]] = None) -> JobConfig:
    return ConfigValidator(scenario_sizes).validate(config)
