"""
Deterministic discrete-event kernel for one data-parallel training iteration.

The two datacenters run the same workload in lockstep, so one logical
timeline is simulated: forward layers, backward layers in reverse, and the
bucketed all-reduce of every gradient bucket. Compute is never blocked by
communication; only the end of the iteration waits for it.
"""
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Sequence, TextIO, Tuple, Union
import heapq
import logging

from .collective import CostTable, Phase
from .exceptions import GeoOverlapError, SimulationError
from .models import JobConfig
from .utils import U64_MAX, ps_to_seconds, seconds_to_ps
from .workload import WorkloadPlan, build_workload

logger = logging.getLogger(__name__)

DEFAULT_MAX_EVENTS = 10**8


class EventKind(Enum):
    FORWARD_LAYER_DONE = "ForwardLayerDone"
    BACKWARD_LAYER_DONE = "BackwardLayerDone"
    BUCKET_READY = "BucketReady"
    PHASE_DONE = "PhaseDone"
    COLLECTIVE_DONE = "CollectiveDone"
    ITERATION_DONE = "IterationDone"


@dataclass(frozen=True)
class Event:
    timestamp_ps: int
    sequence: int
    kind: EventKind
    layer: Optional[int] = None
    bucket: Optional[int] = None
    phase: Optional[Phase] = None

    def detail(self) -> str:
        parts = []
        if self.layer is not None:
            parts.append(f"layer={self.layer}")
        if self.bucket is not None:
            parts.append(f"bucket={self.bucket}")
        if self.phase is not None:
            parts.append(f"phase={self.phase.value}")
        return " ".join(parts) or "-"


@dataclass(frozen=True)
class IterationTrace:
    label: str
    events: Tuple[Event, ...]
    t_compute_ps: int
    t_total_ps: int
    bucket_ready_ps: Tuple[int, ...]
    per_bucket_completion_ps: Tuple[int, ...]
    event_count: int

    @property
    def t_compute(self) -> float:
        return ps_to_seconds(self.t_compute_ps)

    @property
    def t_total(self) -> float:
        return ps_to_seconds(self.t_total_ps)


@dataclass(frozen=True)
class BatchFailure:
    """A batch slot whose run raised instead of producing a trace."""

    index: int
    label: str
    error: str


class EventQueue:
    """
    Future events ordered by (timestamp, sequence).

    Sequence numbers are assigned on insertion, so events at equal
    timestamps dispatch in insertion order.
    """

    def __init__(self, max_events: int = DEFAULT_MAX_EVENTS):
        self.max_events = max_events
        self._heap: List[Tuple[int, int, Event]] = []
        self._sequence = 0
        self.now = 0

    def __len__(self) -> int:
        return len(self._heap)

    @property
    def scheduled(self) -> int:
        return self._sequence

    def schedule(self, timestamp_ps: int, kind: EventKind, **fields) -> Event:
        if timestamp_ps < self.now:
            raise SimulationError(
                f"{kind.value} scheduled at {timestamp_ps} ps, before current time {self.now} ps"
            )
        if timestamp_ps > U64_MAX:
            raise SimulationError(f"timestamp {timestamp_ps} ps overflows the 64-bit clock")
        if self._sequence >= self.max_events:
            raise SimulationError(
                f"event cap of {self.max_events} exceeded; the run is misconfigured"
            )
        event = Event(timestamp_ps, self._sequence, kind, **fields)
        self._sequence += 1
        heapq.heappush(self._heap, (timestamp_ps, event.sequence, event))
        return event

    def pop(self) -> Event:
        if not self._heap:
            raise SimulationError("pop from an empty event queue")
        _, _, event = heapq.heappop(self._heap)
        self.now = event.timestamp_ps
        return event

    def next_timestamp(self) -> Optional[int]:
        return self._heap[0][0] if self._heap else None


class IterationSimulator:
    """Plays one iteration of a validated JobConfig. One instance per run."""

    def __init__(
        self,
        config: JobConfig,
        max_events: int = DEFAULT_MAX_EVENTS,
        record_events: bool = True,
        plan: Optional[WorkloadPlan] = None,
    ):
        self.config = config
        self.plan = plan or build_workload(config)
        self.record_events = record_events
        self.queue = EventQueue(max_events)
        self.costs = CostTable(config.topology, config.inter_traversals, config.quantum_ps)
        self.optimizer_ps = seconds_to_ps(config.optimizer_step_seconds, config.quantum_ps)

        self._by_layer: Dict[int, List[int]] = {}
        for bucket in self.plan.buckets:
            self._by_layer.setdefault(bucket.ready_after_layer, []).append(bucket.bucket_index)

        n = len(self.plan.buckets)
        self._ready: List[Optional[int]] = [None] * n
        self._completion: List[Optional[int]] = [None] * n
        self._waiting: List[Tuple[int, int]] = []
        self._link_busy = False
        self._remaining = n
        self._compute_done: Optional[int] = None
        self._finish: Optional[int] = None
        self._events: List[Event] = []

    def run(self) -> IterationTrace:
        layers = self.plan.layers
        queue = self.queue
        if layers:
            queue.schedule(layers[0].forward_ps, EventKind.FORWARD_LAYER_DONE, layer=0)
        else:
            self._compute_done = 0
            self._maybe_finish()

        while queue:
            event = queue.pop()
            if self.record_events:
                self._events.append(event)
            self._dispatch(event)
            # the link picks its next bucket only once every event at this instant is in
            if queue.next_timestamp() != queue.now:
                self._service_link()

        if self._finish is None:
            raise SimulationError(f"{self.config.label()}: event queue drained before completion")

        logger.debug(
            "%s: %d events, t_total=%d ps", self.config.label(), queue.scheduled, self._finish
        )
        return IterationTrace(
            label=self.config.label(),
            events=tuple(self._events),
            t_compute_ps=self.plan.total_compute_ps,
            t_total_ps=self._finish,
            bucket_ready_ps=tuple(self._ready),
            per_bucket_completion_ps=tuple(self._completion),
            event_count=queue.scheduled,
        )

    def _dispatch(self, event: Event) -> None:
        now = event.timestamp_ps
        queue = self.queue
        layers = self.plan.layers
        kind = event.kind

        if kind is EventKind.FORWARD_LAYER_DONE:
            nxt = event.layer + 1
            if nxt < len(layers):
                queue.schedule(now + layers[nxt].forward_ps, EventKind.FORWARD_LAYER_DONE, layer=nxt)
            else:
                last = len(layers) - 1
                queue.schedule(
                    now + layers[last].backward_ps, EventKind.BACKWARD_LAYER_DONE, layer=last
                )

        elif kind is EventKind.BACKWARD_LAYER_DONE:
            for index in self._by_layer.get(event.layer, ()):
                queue.schedule(now, EventKind.BUCKET_READY, bucket=index)
            if event.layer > 0:
                prev = event.layer - 1
                queue.schedule(
                    now + layers[prev].backward_ps, EventKind.BACKWARD_LAYER_DONE, layer=prev
                )
            else:
                self._compute_done = now
                self._maybe_finish()

        elif kind is EventKind.BUCKET_READY:
            self._ready[event.bucket] = now
            reduce_ps, _, _ = self._durations(event.bucket)
            queue.schedule(
                now + reduce_ps, EventKind.PHASE_DONE, bucket=event.bucket, phase=Phase.INTRA_REDUCE
            )

        elif kind is EventKind.PHASE_DONE:
            if event.phase is Phase.INTRA_REDUCE:
                heapq.heappush(self._waiting, (now, event.bucket))
            elif event.phase is Phase.INTER_EXCHANGE:
                self._link_busy = False
                _, _, broadcast_ps = self._durations(event.bucket)
                queue.schedule(
                    now + broadcast_ps,
                    EventKind.PHASE_DONE,
                    bucket=event.bucket,
                    phase=Phase.INTRA_BROADCAST,
                )
            else:
                queue.schedule(now, EventKind.COLLECTIVE_DONE, bucket=event.bucket)

        elif kind is EventKind.COLLECTIVE_DONE:
            self._completion[event.bucket] = now
            self._remaining -= 1
            self._maybe_finish()

        elif kind is EventKind.ITERATION_DONE:
            self._finish = now

    def _durations(self, bucket_index: int) -> Tuple[int, int, int]:
        return self.costs.phase_durations(self.plan.buckets[bucket_index].bytes)

    def _service_link(self) -> None:
        if self._link_busy or not self._waiting:
            return
        _, index = heapq.heappop(self._waiting)
        _, exchange_ps, _ = self._durations(index)
        self._link_busy = True
        self.queue.schedule(
            self.queue.now + exchange_ps,
            EventKind.PHASE_DONE,
            bucket=index,
            phase=Phase.INTER_EXCHANGE,
        )

    def _maybe_finish(self) -> None:
        if self._compute_done is None or self._remaining:
            return
        self.queue.schedule(self.queue.now + self.optimizer_ps, EventKind.ITERATION_DONE)


def run_iteration(
    config: JobConfig,
    max_events: int = DEFAULT_MAX_EVENTS,
    record_events: bool = True,
) -> IterationTrace:
    """Simulate one training iteration of a validated config."""
    return IterationSimulator(config, max_events, record_events).run()


def _run_slot(args: Tuple[int, JobConfig, int, bool]) -> Union[IterationTrace, BatchFailure]:
    index, config, max_events, record_events = args
    try:
        return run_iteration(config, max_events, record_events)
    except GeoOverlapError as e:
        logger.warning("run %d (%s) failed: %s", index, config.label(), e)
        return BatchFailure(index, config.label(), str(e))


def run_batch(
    configs: Sequence[JobConfig],
    jobs: int = 1,
    max_events: int = DEFAULT_MAX_EVENTS,
    record_events: bool = True,
) -> List[Union[IterationTrace, BatchFailure]]:
    """
    Run independent iterations, results in input order.

    A failing config yields a BatchFailure in its slot instead of aborting
    the batch. ``jobs > 1`` fans out over a process pool.
    """
    slots = [(i, c, max_events, record_events) for i, c in enumerate(configs)]
    if jobs <= 1 or len(slots) <= 1:
        return [_run_slot(slot) for slot in slots]
    logger.info("running %d config(s) on %d worker(s)", len(slots), jobs)
    with ProcessPoolExecutor(max_workers=jobs) as executor:
        return list(executor.map(_run_slot, slots, chunksize=max(1, len(slots) // (jobs * 4))))


def write_trace(trace: IterationTrace, stream: TextIO) -> int:
    """Dump events as ``timestamp_ps<TAB>kind<TAB>detail`` lines; returns bytes written."""
    written = 0
    for event in trace.events:
        line = f"{event.timestamp_ps}\t{event.kind.value}\t{event.detail()}\n"
        stream.write(line)
        written += len(line.encode("utf-8"))
    return written
