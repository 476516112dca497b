"""Overlap, HCF-over-SMF improvement and training-time multipliers."""
from dataclasses import dataclass, replace
from typing import Dict, Iterable, List, Optional, Sequence, Tuple
import logging
import math

from .engine import IterationTrace
from .exceptions import MetricsError
from .models import BASELINE_DISTANCE_M, FiberKind, JobConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SweepRow:
    model: str
    gpu: str
    fiber: str
    total_gpus: int
    distance_m: float
    inter_bw: float
    bucket_bytes: int
    t_compute_s: float
    t_total_s: float
    eta: float
    multiplier: Optional[float] = None

    @property
    def group(self) -> Tuple:
        """Coordinates that share one distance curve."""
        return (self.model, self.gpu, self.fiber, self.total_gpus, self.inter_bw, self.bucket_bytes)

    @property
    def pair_key(self) -> Tuple:
        """Coordinates matched across fibers."""
        return (self.model, self.gpu, self.total_gpus, self.distance_m, self.inter_bw, self.bucket_bytes)

    def sort_key(self) -> Tuple:
        return (
            self.model,
            self.gpu,
            self.fiber,
            self.total_gpus,
            self.distance_m,
            self.inter_bw,
            self.bucket_bytes,
        )


@dataclass(frozen=True)
class DeltaRow:
    model: str
    gpu: str
    total_gpus: int
    distance_m: float
    inter_bw: float
    bucket_bytes: int
    delta_eta: float

    @property
    def group(self) -> Tuple:
        return (self.model, self.gpu, self.total_gpus, self.inter_bw, self.bucket_bytes)

    def sort_key(self) -> Tuple:
        return (
            self.model,
            self.gpu,
            self.total_gpus,
            self.distance_m,
            self.inter_bw,
            self.bucket_bytes,
        )


def overlap(trace: IterationTrace) -> float:
    """T_compute / T_total of one iteration."""
    if trace.t_total_ps <= 0:
        raise MetricsError(f"{trace.label}: t_total is zero, overlap is undefined")
    return trace.t_compute_ps / trace.t_total_ps


def row_from_trace(config: JobConfig, trace: IterationTrace) -> SweepRow:
    topo = config.topology
    return SweepRow(
        model=config.model.name,
        gpu=config.gpu.name,
        fiber=topo.fiber.kind.value,
        total_gpus=topo.total_gpus,
        distance_m=topo.inter_distance,
        inter_bw=topo.inter_bandwidth,
        bucket_bytes=config.bucket_bytes,
        t_compute_s=trace.t_compute,
        t_total_s=trace.t_total,
        eta=overlap(trace),
    )


def is_baseline(row: SweepRow) -> bool:
    return math.isclose(row.distance_m, BASELINE_DISTANCE_M, rel_tol=1e-9)


def time_multiplier(row: SweepRow, baseline: Optional[SweepRow]) -> float:
    """t_total relative to the same coordinates at the 0.3 km baseline."""
    if baseline is None:
        raise MetricsError(f"no {BASELINE_DISTANCE_M:g} m baseline for {row.group}")
    if not is_baseline(baseline):
        raise MetricsError(
            f"baseline must sit at {BASELINE_DISTANCE_M:g} m, got {baseline.distance_m:g} m"
        )
    if baseline.group != row.group:
        raise MetricsError(f"baseline {baseline.group} does not match row {row.group}")
    return row.t_total_s / baseline.t_total_s


def attach_multipliers(rows: Iterable[SweepRow], strict: bool = True) -> List[SweepRow]:
    """
    Fill in every row's multiplier from its group's baseline row.

    With ``strict=False`` rows of groups without a baseline keep
    ``multiplier=None`` instead of raising.
    """
    rows = list(rows)
    baselines: Dict[Tuple, SweepRow] = {r.group: r for r in rows if is_baseline(r)}
    missing = sorted({r.group for r in rows} - set(baselines), key=str)
    if missing:
        message = f"{len(missing)} group(s) lack a {BASELINE_DISTANCE_M:g} m baseline: {missing[:3]}"
        if strict:
            raise MetricsError(message)
        logger.warning(message)
    return [
        replace(r, multiplier=time_multiplier(r, baselines[r.group])) if r.group in baselines else r
        for r in rows
    ]


def delta_eta(rows: Sequence[SweepRow]) -> Tuple[List[DeltaRow], List[str]]:
    """
    Pair HCF and SMF rows on all other coordinates and emit eta(HCF) - eta(SMF).

    Returns:
        (delta rows, warnings naming every duplicate row and every coordinate
        without a partner); the first of several duplicates is the one paired
    """
    warnings = []
    by_fiber: Dict[str, Dict[Tuple, SweepRow]] = {k.value: {} for k in FiberKind}
    for row in rows:
        seen = by_fiber.setdefault(row.fiber, {})
        if row.pair_key in seen:
            warnings.append(f"duplicate {row.fiber} row at {row.pair_key}")
            continue
        seen[row.pair_key] = row
    hcf, smf = by_fiber[FiberKind.HCF.value], by_fiber[FiberKind.SMF.value]

    deltas: List[DeltaRow] = []
    for key in sorted(set(hcf) & set(smf)):
        model, gpu, total_gpus, distance_m, inter_bw, bucket_bytes = key
        deltas.append(
            DeltaRow(
                model, gpu, total_gpus, distance_m, inter_bw, bucket_bytes,
                hcf[key].eta - smf[key].eta,
            )
        )

    for fiber, present, other in (("hcf", hcf, smf), ("smf", smf, hcf)):
        for key in sorted(set(present) - set(other)):
            warnings.append(f"unpaired {fiber} row at {key}")
    for message in warnings:
        logger.warning(message)
    return deltas, warnings


def peak_delta(deltas: Iterable[DeltaRow]) -> Dict[Tuple, DeltaRow]:
    """Per-group row with the largest eta improvement (first distance on ties)."""
    peaks: Dict[Tuple, DeltaRow] = {}
    for row in sorted(deltas, key=DeltaRow.sort_key):
        best = peaks.get(row.group)
        if best is None or row.delta_eta > best.delta_eta:
            peaks[row.group] = row
    return peaks
