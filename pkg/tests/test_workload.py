import pytest

from geo_overlap_sim import GPU_PRESETS, MODEL_PRESETS, ModelSpec, WorkloadError
from geo_overlap_sim.workload import (
    build_buckets,
    build_layer_timings,
    build_workload,
    flops_per_iteration,
    flops_split,
)

GPT3_13B = MODEL_PRESETS["gpt3-13b"]
GPT3_175B = MODEL_PRESETS["gpt3-175b"]
A100 = GPU_PRESETS["a100"]

def test_flops_follow_six_per_param_token():
    forward, backward = flops_split(GPT3_13B, 8192)
    assert forward == 2 * 13_000_000_000 * 8192
    assert backward == 2 * forward
    assert flops_per_iteration(GPT3_13B, 8192) == 6 * 13_000_000_000 * 8192

def test_flops_errors():
    with pytest.raises(WorkloadError):
        flops_split(GPT3_13B, 0)
    huge = ModelSpec(name="huge", parameter_count=10**18, layer_count=1)
    with pytest.raises(WorkloadError, match="overflows"):
        flops_split(huge, 10_000)

def test_layer_timings_gpt3_13b_a100():
    layers = build_layer_timings(GPT3_13B, A100, 8192)
    assert len(layers) == 40
    # 5.3248e12 FLOPs per layer at 312 TFLOPS, rounded up to the picosecond
    assert layers[0].forward_ps == 17_066_666_667
    assert all(layer.backward_ps == 2 * layer.forward_ps for layer in layers)
    assert [layer.layer_index for layer in layers] == list(range(40))

def test_layer_timings_quantum_and_efficiency():
    layers = build_layer_timings(GPT3_13B, A100, 8192, quantum_ps=1000)
    assert layers[0].forward_ps == 17_066_667_000
    derated = build_layer_timings(GPT3_13B, A100, 8192, efficiency=0.5)
    assert derated[0].forward_ps == 34_133_333_334

def test_build_workload_total_compute(make_config):
    plan = build_workload(make_config())
    assert plan.total_compute_ps == 40 * (17_066_666_667 + 34_133_333_334)
    assert plan.total_compute_seconds == pytest.approx(2.048)
    assert plan.forward_ps == 40 * 17_066_666_667

def test_bucket_counts():
    assert len(build_buckets(GPT3_13B, 25_000_000)) == 1040
    assert len(build_buckets(GPT3_175B, 25_000_000)) == 14_000

def test_buckets_cover_gradients_in_backward_order():
    buckets = build_buckets(GPT3_13B, 25_000_000)
    assert sum(b.bytes for b in buckets) == GPT3_13B.gradient_bytes
    assert [b.bucket_index for b in buckets] == list(range(len(buckets)))
    ready = [b.ready_after_layer for b in buckets]
    assert ready == sorted(ready, reverse=True)
    # 650 MB of gradients per layer: 26 buckets fill during the last layer
    assert ready[25] == 39
    assert ready[26] == 38
    assert ready[-1] == 0

def test_remainder_bucket():
    model = ModelSpec(name="toy", parameter_count=10, layer_count=2)
    buckets = build_buckets(model, 8)
    assert [b.bytes for b in buckets] == [8, 8, 4]
    assert [b.ready_after_layer for b in buckets] == [1, 0, 0]

def test_single_bucket_when_bucket_exceeds_gradients():
    model = ModelSpec(name="toy", parameter_count=1000, layer_count=4)
    buckets = build_buckets(model, 1_000_000)
    assert len(buckets) == 1
    assert buckets[0].bytes == 2000
    assert buckets[0].ready_after_layer == 0

def test_bucket_size_must_be_positive():
    with pytest.raises(WorkloadError):
        build_buckets(GPT3_13B, 0)
