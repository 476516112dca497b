import pytest

from geo_overlap_sim import (
    ConfigError,
    ConfigValidationError,
    FiberKind,
    ParseError,
    parse_config,
    parse_config_file,
    serialize_config,
)
from geo_overlap_sim.parser import config_to_pairs, tokenize_sweep

SCENARIO = """\
model = gpt3-13b
gpu = a100
fiber = smf
total_gpus = 256
inter_distance_km = 100
"""

def test_parse_config_file(test_data):
    config = parse_config_file(test_data / "gpt13b_a100_smf_100km.cfg")
    assert config.model.name == "gpt3-13b"
    assert config.model.parameter_count == 13_000_000_000
    assert config.gpu.peak_flops == 312e12
    assert config.topology.fiber.kind is FiberKind.SMF
    assert config.topology.fiber.propagation_speed == 2e8
    assert config.topology.gpus_per_dc == 128
    assert config.total_gpus == 256
    assert config.topology.inter_distance == 100_000.0
    assert config.topology.inter_bandwidth == 100e9
    assert config.bucket_bytes == 25_000_000

def test_parse_config_defaults():
    config = parse_config(SCENARIO)
    assert config.tokens_per_gpu == 8192
    assert config.bucket_bytes == 25_000_000
    assert config.topology.intra_bandwidth == 600e9
    assert config.topology.intra_latency == 1e-6
    assert config.optimizer_step_seconds == 0.0
    assert config.inter_traversals == 1
    assert config.quantum_ps == 1

def test_parse_config_comments_and_case():
    config = parse_config(
        "# two small datacenters\n\n"
        "model = GPT3-175B   # the big one\n"
        "gpu = h100\nfiber = HCF\ntotal_gpus = 8192\ninter_distance_km = 0.3\n"
    )
    assert config.model.name == "gpt3-175b"
    assert config.topology.fiber.propagation_speed == 3e8
    assert config.topology.inter_distance == 300.0

def test_parse_config_overrides():
    config = parse_config(
        SCENARIO
        + "model_params = 1000000\nmodel_layers = 3\ngpu_tflops = 100\n"
        + "fiber_speed_mps = 204000000\ncompute_efficiency = 0.45\noptimizer_step_ms = 1.5\n"
    )
    assert config.model.parameter_count == 1_000_000
    assert config.model.layer_count == 3
    assert config.gpu.peak_flops == 100e12
    assert config.topology.fiber.propagation_speed == 2.04e8
    assert config.compute_efficiency == 0.45
    assert config.optimizer_step_seconds == 0.0015

def test_serialize_round_trip(make_config):
    configs = [
        make_config(),
        make_config(fiber="hcf", inter_distance_km="2.154434690031884"),
        make_config(intra_latency_us="2.5", optimizer_step_ms="1.5", quantum_ps=1000),
        make_config(model_params=40_000_000, model_layers=4, gpu_tflops="123.4"),
        make_config(fiber_speed_mps="204000000", compute_efficiency="0.45", inter_traversals=2),
        make_config(inter_bandwidth_gbytes="200", bucket_mbytes="1.5", grad_bytes_per_param=4),
    ]
    for config in configs:
        assert parse_config(serialize_config(config)) == config

def test_serialize_omits_unchanged_overrides(make_config):
    pairs = config_to_pairs(make_config())
    assert list(pairs)[:5] == ["model", "gpu", "fiber", "total_gpus", "inter_distance_km"]
    for key in ("model_params", "model_layers", "gpu_tflops", "fiber_speed_mps"):
        assert key not in pairs

def test_missing_required_key_in_schema_order():
    with pytest.raises(ConfigError, match="missing required key: model"):
        parse_config("gpu = a100\n")
    with pytest.raises(ConfigError, match="missing required key: inter_distance_km"):
        parse_config("model = gpt3-13b\ngpu = a100\nfiber = smf\ntotal_gpus = 16\n")

def test_unknown_key_and_preset():
    with pytest.raises(ConfigError, match="unknown key: colour"):
        parse_config(SCENARIO + "colour = blue\n")
    with pytest.raises(ConfigError, match="unknown gpu preset"):
        parse_config(SCENARIO.replace("a100", "v100"))

def test_malformed_line_position(test_data):
    with pytest.raises(ParseError) as exc_info:
        parse_config_file(test_data / "malformed.cfg")
    assert exc_info.value.line == 2
    assert exc_info.value.column == 1
    assert str(exc_info.value).startswith("line 2, column 1:")

def test_bad_number_position():
    text = SCENARIO.replace("inter_distance_km = 100", "inter_distance_km = far")
    with pytest.raises(ParseError) as exc_info:
        parse_config(text)
    assert exc_info.value.line == 5
    assert exc_info.value.column == 21

def test_duplicate_and_empty_values():
    with pytest.raises(ParseError, match="duplicate key"):
        parse_config(SCENARIO + "gpu = h100\n")
    with pytest.raises(ParseError, match="missing value"):
        parse_config(SCENARIO + "tokens_per_gpu =\n")

def test_integer_keys_reject_fractions():
    with pytest.raises(ParseError, match="must be an integer"):
        parse_config(SCENARIO + "tokens_per_gpu = 12.5\n")
    with pytest.raises(ParseError, match="whole bytes"):
        parse_config(SCENARIO + "bucket_mbytes = 1.0000005\n")

def test_total_gpus_must_split_evenly():
    with pytest.raises(ConfigError, match="even count"):
        parse_config(SCENARIO.replace("256", "255"))

def test_invalid_values_report_every_violation(test_data):
    with pytest.raises(ConfigValidationError) as exc_info:
        parse_config_file(test_data / "invalid_values.cfg")
    fields = {v.field for v in exc_info.value.violations}
    assert fields == {"topology.inter_distance", "bucket_bytes", "compute_efficiency"}

def test_parse_config_file_missing(tmp_path):
    with pytest.raises(FileNotFoundError):
        parse_config_file(tmp_path / "nope.cfg")

def test_tokenize_sweep_lists_and_ranges():
    singles, axes = tokenize_sweep(
        "model = gpt3-13b\nfiber = hcf, smf\ninter_distance_km = 0.3:1000:3, 5000\n"
    )
    assert singles == {"model": "gpt3-13b"}
    assert axes["fiber"] == ["hcf", "smf"]
    distances = axes["inter_distance_km"]
    assert len(distances) == 4
    assert distances[0] == "0.3"
    assert distances[2] == "1000.0"
    assert distances[3] == "5000"

def test_tokenize_sweep_errors():
    with pytest.raises(ParseError, match="only supported for inter_distance_km"):
        tokenize_sweep("total_gpus = 256:8192:3\n")
    with pytest.raises(ParseError, match="empty list element"):
        tokenize_sweep("fiber = hcf,,smf\n")
    with pytest.raises(ParseError):
        tokenize_sweep("inter_distance_km = 1:10\n")
    with pytest.raises(ParseError):
        tokenize_sweep("inter_distance_km = 10:1:3\n")
