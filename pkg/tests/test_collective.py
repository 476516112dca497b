import pytest

from geo_overlap_sim import FiberType, Phase, TopologySpec, allreduce_phases, allreduce_pipeline_time
from geo_overlap_sim.collective import PHASE_ORDER, CostTable, allreduce_completion_times
from geo_overlap_sim.workload import Bucket

BUCKET = 25_000_000
# 25 MB at 600 GB/s plus 1 us fabric latency
INTRA_PS = 41_666_667 + 1_000_000
# 25 MB at 100 GB/s plus 100 km of SMF
EXCHANGE_PS = 250_000_000 + 500_000_000

@pytest.fixture
def topology():
    return TopologySpec(gpus_per_dc=128, inter_distance=100_000.0, fiber=FiberType.smf())

def buckets(count, nbytes=BUCKET):
    return [Bucket(i, nbytes, 0) for i in range(count)]

def test_phase_costs(topology):
    cost = allreduce_phases(BUCKET, topology)
    assert [p.phase for p in cost.phases] == list(PHASE_ORDER)
    assert cost.phase_ps(Phase.INTRA_REDUCE) == INTRA_PS
    assert cost.phase_ps(Phase.INTER_EXCHANGE) == EXCHANGE_PS
    assert cost.phase_ps(Phase.INTRA_BROADCAST) == INTRA_PS
    assert cost.total_ps == 2 * INTRA_PS + EXCHANGE_PS
    assert cost.total == pytest.approx(8.35333334e-4)

def test_inter_traversals_scale_exchange(topology):
    cost = allreduce_phases(BUCKET, topology, inter_traversals=2)
    assert cost.phase_ps(Phase.INTER_EXCHANGE) == 2 * EXCHANGE_PS
    assert cost.phase_ps(Phase.INTRA_REDUCE) == INTRA_PS

def test_hcf_only_changes_propagation(topology):
    hcf = topology.model_copy(update={"fiber": FiberType.hcf()})
    cost = allreduce_phases(BUCKET, hcf)
    assert cost.phase_ps(Phase.INTER_EXCHANGE) == 250_000_000 + 333_333_334
    assert cost.phase_ps(Phase.INTRA_REDUCE) == INTRA_PS

def test_cost_table_memoises(topology):
    table = CostTable(topology)
    assert table.phase_durations(BUCKET) == (INTRA_PS, EXCHANGE_PS, INTRA_PS)
    assert table.phase_durations(BUCKET) is table.phase_durations(BUCKET)

def test_single_bucket_completion(topology):
    assert allreduce_completion_times(buckets(1), topology, [0]) == [2 * INTRA_PS + EXCHANGE_PS]

def test_link_serves_one_bucket_at_a_time(topology):
    first, second = allreduce_completion_times(buckets(2), topology, [0, 0])
    assert first == 2 * INTRA_PS + EXCHANGE_PS
    # every exchange pays the full propagation delay again
    assert second - first == EXCHANGE_PS

def test_spaced_buckets_do_not_queue(topology):
    gap = 10**12
    first, second = allreduce_completion_times(buckets(2), topology, [0, gap])
    assert second - gap == first

def test_smaller_bucket_reaching_link_first(topology):
    mixed = [Bucket(0, BUCKET, 0), Bucket(1, 1_000_000, 0)]
    first, second = allreduce_completion_times(mixed, topology, [0, 0])
    small_reduce, small_exchange, small_broadcast = CostTable(topology).phase_durations(1_000_000)
    # the small bucket finishes its reduce sooner and takes the link first
    assert second == small_reduce + small_exchange + small_broadcast
    assert first == small_reduce + small_exchange + EXCHANGE_PS + INTRA_PS

def test_pipeline_time(topology):
    assert allreduce_pipeline_time(buckets(3), topology, [0, 0, 0]) == 2 * INTRA_PS + 3 * EXCHANGE_PS
    assert allreduce_pipeline_time([], topology, []) == 0

def test_completion_times_argument_errors(topology):
    with pytest.raises(ValueError):
        allreduce_completion_times(buckets(2), topology, [0])
    with pytest.raises(ValueError):
        allreduce_completion_times(buckets(2), topology, [5, 0])
