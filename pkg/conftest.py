from pathlib import Path

import pytest

from geo_overlap_sim import JobConfig, parse_config
from geo_overlap_sim.parser import serialize_config

TEST_DATA = Path(__file__).parent / "tests" / "test_data"


def pytest_addoption(parser):
    parser.addoption(
        "--run-slow",
        action="store_true",
        default=False,
        help="run full-grid acceptance tests"
    )

def pytest_configure(config):
    config.addinivalue_line(
        "markers", "slow: mark test as a full-grid acceptance run"
    )

def pytest_collection_modifyitems(config, items):
    if not config.getoption("--run-slow"):
        skip_slow = pytest.mark.skip(reason="need --run-slow option to run")
        for item in items:
            if "slow" in item.keywords:
                item.add_marker(skip_slow)

@pytest.fixture
def test_data():
    """Directory holding scenario and sweep files."""
    return TEST_DATA

@pytest.fixture
def make_config():
    """Build a validated JobConfig from scenario keys, with small defaults."""
    def factory(**overrides) -> JobConfig:
        pairs = {
            "model": "gpt3-13b",
            "gpu": "a100",
            "fiber": "smf",
            "total_gpus": "256",
            "inter_distance_km": "100",
        }
        pairs.update({k: str(v) for k, v in overrides.items()})
        return parse_config("\n".join(f"{k} = {v}" for k, v in pairs.items()))
    return factory

@pytest.fixture
def small_config(make_config):
    """Few layers and buckets so a full iteration runs in milliseconds."""
    return make_config(model_params=40_000_000, model_layers=4, bucket_mbytes=10)

@pytest.fixture
def write_config(tmp_path):
    """Write a JobConfig to a scenario file and return its path."""
    def writer(config: JobConfig, name: str = "scenario.cfg") -> Path:
        path = tmp_path / name
        path.write_text(serialize_config(config), encoding="utf-8")
        return path
    return writer
