"""
Parameter sweeps: grid expansion, batch execution and derived experiments
(bandwidth doubling, feasible inter-DC radius).
"""
from collections import Counter
from dataclasses import dataclass
from math import prod
from typing import Dict, List, Optional, Sequence, Tuple
import itertools
import logging

from pydantic import BaseModel, ConfigDict

from .engine import BatchFailure, IterationTrace, run_batch, run_iteration
from .exceptions import GeoOverlapError, SweepError
from .metrics import SweepRow, attach_multipliers, overlap, row_from_trace
from .models import (
    BASELINE_DISTANCE_M,
    SCENARIO_TOTAL_GPUS,
    FiberKind,
    FiberType,
    JobConfig,
)
from .network import inter_link, transfer_time
from .parser import CONFIG_KEYS, config_to_pairs, pairs_to_config, tokenize_sweep
from .utils import geometric_range
from .validators import ConfigValidator
from .workload import build_buckets

logger = logging.getLogger(__name__)

DEFAULT_MAX_CONFIGS = 10_000
DEFAULT_DISTANCE_KM = (0.3, 1000.0, 13)


class SweepSpec(BaseModel):
    """A base scenario plus value lists for the swept keys."""

    model_config = ConfigDict(frozen=True)

    base: JobConfig
    axes: Dict[str, Tuple[str, ...]] = {}
    max_configs: int = DEFAULT_MAX_CONFIGS
    scenario_sizes: Optional[Tuple[int, ...]] = None

    @property
    def cardinality(self) -> int:
        return prod(len(values) for values in self.axes.values())


def parse_sweep(text: str, max_configs: int = DEFAULT_MAX_CONFIGS) -> SweepSpec:
    """
    Parse a sweep document; the first value of every axis forms the base.

    The base is a template only. Range checks run per combination in
    expand_sweep so that every invalid one is reported.
    """
    singles, axes = tokenize_sweep(text)
    base_pairs = dict(singles)
    for key, values in axes.items():
        base_pairs[key] = values[0]
    base = pairs_to_config(base_pairs, check=False)
    return SweepSpec(
        base=base,
        axes={key: tuple(values) for key, values in axes.items()},
        max_configs=max_configs,
    )


def expand_sweep(spec: SweepSpec) -> List[JobConfig]:
    """
    Cartesian product over the axes in schema key order, each config validated.

    Raises:
        SweepError: product exceeds the cap, or one or more combinations are
            invalid (all of them are collected)
    """
    unknown = sorted(set(spec.axes) - set(CONFIG_KEYS))
    if unknown:
        raise SweepError(f"unknown sweep key(s): {', '.join(unknown)}")
    if spec.cardinality > spec.max_configs:
        raise SweepError(
            f"sweep expands to {spec.cardinality} configs, above the cap of {spec.max_configs}"
        )

    keys = [k for k in CONFIG_KEYS if k in spec.axes]
    base_pairs = config_to_pairs(spec.base)
    validator = ConfigValidator(spec.scenario_sizes)
    configs: List[JobConfig] = []
    errors: List[str] = []
    for combo in itertools.product(*(spec.axes[k] for k in keys)):
        pairs = {**base_pairs, **dict(zip(keys, combo))}
        try:
            configs.append(validator.validate(pairs_to_config(pairs)))
        except GeoOverlapError as e:
            errors.append(f"{dict(zip(keys, combo))}: {e}")
    if errors:
        raise SweepError(f"{len(errors)} invalid sweep combination(s)", errors)
    logger.info("expanded sweep into %d config(s)", len(configs))
    return configs


def default_sweep(
    total_gpus: int = 8192,
    inter_bandwidth_gbytes: str = "100",
    distance_km: Tuple[float, float, int] = DEFAULT_DISTANCE_KM,
) -> SweepSpec:
    """2 models x 2 GPUs x 2 fibers x log-spaced distances for one cluster size."""
    lo, hi, steps = distance_km
    base = pairs_to_config(
        {
            "model": "gpt3-13b",
            "gpu": "a100",
            "fiber": "smf",
            "total_gpus": str(total_gpus),
            "inter_distance_km": repr(float(lo)),
            "inter_bandwidth_gbytes": inter_bandwidth_gbytes,
        }
    )
    return SweepSpec(
        base=base,
        axes={
            "model": ("gpt3-13b", "gpt3-175b"),
            "gpu": ("a100", "h100"),
            "fiber": ("hcf", "smf"),
            "inter_distance_km": tuple(repr(d) for d in geometric_range(lo, hi, steps)),
        },
        scenario_sizes=SCENARIO_TOTAL_GPUS,
    )


def at_distance(config: JobConfig, distance_m: float) -> JobConfig:
    topology = config.topology.model_copy(update={"inter_distance": distance_m})
    return config.model_copy(update={"topology": topology})


def with_fiber(config: JobConfig, kind: FiberKind) -> JobConfig:
    topology = config.topology.model_copy(update={"fiber": FiberType.of(kind)})
    return config.model_copy(update={"topology": topology})


def with_baselines(configs: Sequence[JobConfig]) -> List[JobConfig]:
    """Append a 0.3 km config for every curve that lacks one."""
    def curve(c: JobConfig) -> JobConfig:
        return at_distance(c, BASELINE_DISTANCE_M)

    present = {curve(c) for c in configs if c.topology.inter_distance == BASELINE_DISTANCE_M}
    extra: List[JobConfig] = []
    for c in configs:
        base = curve(c)
        if base not in present:
            present.add(base)
            extra.append(base)
    if extra:
        logger.info("adding %d baseline config(s) at %g m", len(extra), BASELINE_DISTANCE_M)
    return list(configs) + extra


@dataclass(frozen=True)
class SweepOutcome:
    rows: List[SweepRow]
    traces: List[IterationTrace]
    failures: List[BatchFailure]


def run_sweep(
    configs: Sequence[JobConfig],
    jobs: int = 1,
    record_events: bool = False,
) -> SweepOutcome:
    """Run every config and derive rows with multipliers, in input order."""
    results = run_batch(configs, jobs=jobs, record_events=record_events)
    rows: List[SweepRow] = []
    traces: List[IterationTrace] = []
    failures: List[BatchFailure] = []
    for config, result in zip(configs, results):
        if isinstance(result, BatchFailure):
            failures.append(result)
            continue
        traces.append(result)
        rows.append(row_from_trace(config, result))
    return SweepOutcome(attach_multipliers(rows, strict=False), traces, failures)


@dataclass(frozen=True)
class AblationPoint:
    base: SweepRow
    doubled: SweepRow
    improvement: float
    analytic_bound: float


@dataclass(frozen=True)
class AblationResult:
    points: List[AblationPoint]

    @property
    def max_improvement(self) -> float:
        return max((p.improvement for p in self.points), default=0.0)

    @property
    def max_analytic_bound(self) -> float:
        return max((p.analytic_bound for p in self.points), default=0.0)


def serialization_saving_ps(config: JobConfig, factor: int = 2) -> int:
    """Long-haul serialization time removed by multiplying the bandwidth by factor."""
    link = inter_link(config.topology)
    faster = link.model_copy(update={"bandwidth": link.bandwidth * factor})
    sizes = Counter(b.bytes for b in build_buckets(config.model, config.bucket_bytes))
    saving = 0
    for nbytes, count in sizes.items():
        before = transfer_time(nbytes, link, config.quantum_ps).serialization_ps
        after = transfer_time(nbytes, faster, config.quantum_ps).serialization_ps
        saving += (before - after) * count * config.inter_traversals
    return saving


def with_quantum(spec: SweepSpec, quantum_ps: int) -> SweepSpec:
    return spec.model_copy(update={"base": spec.base.model_copy(update={"quantum_ps": quantum_ps})})


def bandwidth_ablation(
    total_gpus: int = 256,
    jobs: int = 1,
    distance_km: Tuple[float, float, int] = DEFAULT_DISTANCE_KM,
    quantum_ps: int = 1,
) -> AblationResult:
    """
    Overlap gain from doubling inter-DC bandwidth (100 -> 200 GB/s).

    The analytic bound per point assumes the whole serialization saving
    comes off the exposed communication time.
    """
    base_configs = expand_sweep(with_quantum(default_sweep(total_gpus, "100", distance_km), quantum_ps))
    doubled_configs = expand_sweep(
        with_quantum(default_sweep(total_gpus, "200", distance_km), quantum_ps)
    )
    base = run_sweep(base_configs, jobs)
    doubled = run_sweep(doubled_configs, jobs)
    if base.failures or doubled.failures:
        failed = [f.label for f in base.failures + doubled.failures]
        raise SweepError(f"{len(failed)} ablation run(s) failed", failed)

    points = []
    for config, slow, fast in zip(base_configs, base.rows, doubled.rows):
        exposed = slow.t_total_s - slow.t_compute_s
        saving = min(exposed, serialization_saving_ps(config) / 1e12)
        bound = slow.t_compute_s / (slow.t_total_s - saving) - slow.eta
        points.append(AblationPoint(slow, fast, fast.eta - slow.eta, bound))
    result = AblationResult(points)
    logger.info(
        "bandwidth doubling: max eta improvement %.6f (analytic bound %.6f)",
        result.max_improvement,
        result.max_analytic_bound,
    )
    return result


def feasible_radius(
    config: JobConfig,
    eta_target: float,
    max_distance_m: float = 1e6,
    tolerance_m: float = 10.0,
) -> float:
    """
    Largest inter-DC distance whose overlap stays at or above eta_target.

    Bisection relies on overlap being non-increasing in distance. Returns 0.0
    when even co-located datacenters miss the target.
    """
    if not 0 < eta_target <= 1:
        raise ValueError(f"eta_target must be in (0, 1], got {eta_target}")

    def eta_at(distance: float) -> float:
        return overlap(run_iteration(at_distance(config, distance), record_events=False))

    if eta_at(max_distance_m) >= eta_target:
        return max_distance_m
    if eta_at(0.0) < eta_target:
        return 0.0
    lo, hi = 0.0, max_distance_m
    while hi - lo > tolerance_m:
        mid = (lo + hi) / 2
        if eta_at(mid) >= eta_target:
            lo = mid
        else:
            hi = mid
    return lo


def feasible_radii(config: JobConfig, eta_target: float, **kwargs) -> Dict[str, float]:
    """Feasible radius for each fiber kind, keyed by fiber name."""
    return {
        kind.value: feasible_radius(with_fiber(config, kind), eta_target, **kwargs)
        for kind in FiberKind
    }
