"""
Hierarchical all-reduce over two lumped datacenters.

Each bucket goes through three dependent phases: reduce inside each
datacenter, exchange the partial sums over the long-haul link, broadcast
inside each datacenter. Intra-DC phases never queue. The long-haul link
carries one bucket exchange at a time in FIFO order, and every exchange
pays the full propagation delay.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Sequence, Tuple

from .models import TopologySpec
from .network import CommTime, inter_link, intra_link, transfer_time
from .utils import ps_to_seconds
from .workload import Bucket


class Phase(Enum):
    INTRA_REDUCE = "IntraReduce"
    INTER_EXCHANGE = "InterExchange"
    INTRA_BROADCAST = "IntraBroadcast"


PHASE_ORDER = (Phase.INTRA_REDUCE, Phase.INTER_EXCHANGE, Phase.INTRA_BROADCAST)


@dataclass(frozen=True)
class PhaseCost:
    phase: Phase
    comm: CommTime


@dataclass(frozen=True)
class CollectiveCost:
    phases: Tuple[PhaseCost, ...]

    @property
    def total_ps(self) -> int:
        return sum(p.comm.total_ps for p in self.phases)

    @property
    def total(self) -> float:
        return ps_to_seconds(self.total_ps)

    def phase_ps(self, phase: Phase) -> int:
        for cost in self.phases:
            if cost.phase is phase:
                return cost.comm.total_ps
        raise KeyError(phase)


def allreduce_phases(
    bucket_bytes: int,
    topology: TopologySpec,
    inter_traversals: int = 1,
    quantum_ps: int = 1,
) -> CollectiveCost:
    """Cost of each phase of one bucket's all-reduce."""
    intra = transfer_time(bucket_bytes, intra_link(topology), quantum_ps)
    one_way = transfer_time(bucket_bytes, inter_link(topology), quantum_ps)
    # both directions share one full-duplex traversal
    inter = CommTime(
        one_way.serialization_ps * inter_traversals,
        one_way.propagation_ps * inter_traversals,
    )
    return CollectiveCost(
        (
            PhaseCost(Phase.INTRA_REDUCE, intra),
            PhaseCost(Phase.INTER_EXCHANGE, inter),
            PhaseCost(Phase.INTRA_BROADCAST, intra),
        )
    )


class CostTable:
    """Memoised per-size phase costs for one topology."""

    def __init__(self, topology: TopologySpec, inter_traversals: int = 1, quantum_ps: int = 1):
        self.topology = topology
        self.inter_traversals = inter_traversals
        self.quantum_ps = quantum_ps
        self._cache: Dict[int, Tuple[int, int, int]] = {}

    def phase_durations(self, nbytes: int) -> Tuple[int, int, int]:
        """(reduce, exchange, broadcast) picoseconds for a bucket of nbytes."""
        if nbytes not in self._cache:
            cost = allreduce_phases(nbytes, self.topology, self.inter_traversals, self.quantum_ps)
            self._cache[nbytes] = tuple(cost.phase_ps(p) for p in PHASE_ORDER)
        return self._cache[nbytes]


def allreduce_completion_times(
    buckets: Sequence[Bucket],
    topology: TopologySpec,
    start_times_ps: Sequence[int],
    inter_traversals: int = 1,
    quantum_ps: int = 1,
) -> List[int]:
    """
    Completion time of every bucket's all-reduce, in picoseconds.

    Buckets reach the long-haul link in order of reduce completion (ties by
    bucket index). Exchange of the k-th arrival starts at
    max(its reduce completion, exchange completion of arrival k-1).
    """
    if len(buckets) != len(start_times_ps):
        raise ValueError(
            f"got {len(start_times_ps)} start time(s) for {len(buckets)} bucket(s)"
        )
    if any(b < a for a, b in zip(start_times_ps, start_times_ps[1:])):
        raise ValueError("start times must be non-decreasing")

    table = CostTable(topology, inter_traversals, quantum_ps)
    durations = [table.phase_durations(bucket.bytes) for bucket in buckets]
    arrivals = [start + d[0] for start, d in zip(start_times_ps, durations)]

    link_free = 0
    completions: List[int] = [0] * len(buckets)
    for i in sorted(range(len(buckets)), key=lambda i: (arrivals[i], i)):
        _, exchange_ps, broadcast_ps = durations[i]
        exchange_start = max(arrivals[i], link_free)
        link_free = exchange_start + exchange_ps
        completions[i] = link_free + broadcast_ps
    return completions


def allreduce_pipeline_time(
    buckets: Sequence[Bucket],
    topology: TopologySpec,
    start_times_ps: Sequence[int],
    inter_traversals: int = 1,
    quantum_ps: int = 1,
) -> int:
    """Completion time of the last bucket (0 when there are no buckets)."""
    completions = allreduce_completion_times(
        buckets, topology, start_times_ps, inter_traversals, quantum_ps
    )
    return max(completions, default=0)
