from dataclasses import dataclass
from decimal import Decimal
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple, Union
import logging
import re

from .exceptions import ConfigError, ParseError
from .models import (
    FIBER_PRESETS,
    GPU_PRESETS,
    MODEL_PRESETS,
    FiberType,
    GpuSpec,
    JobConfig,
    ModelSpec,
    TopologySpec,
)
from .utils import (
    geometric_range,
    is_valid_file_path,
    load_text,
    parse_decimal,
    scaled_float,
    unscaled_text,
)
from .validators import validate

logger = logging.getLogger(__name__)

_KEY_RE = re.compile(r"[a-z_][a-z0-9_]*\Z")

KM = 1000
GBYTES = 10**9
MBYTES = 10**6
TFLOPS = 10**12
MICRO = Decimal("1e-6")
MILLI = Decimal("1e-3")

# Schema order; the first five are required.
REQUIRED_KEYS = ("model", "gpu", "fiber", "total_gpus", "inter_distance_km")
OPTIONAL_KEYS = (
    "inter_bandwidth_gbytes",
    "intra_bandwidth_gbytes",
    "intra_latency_us",
    "tokens_per_gpu",
    "bucket_mbytes",
    "grad_bytes_per_param",
    "optimizer_step_ms",
    "inter_traversals",
    "compute_efficiency",
    "fiber_speed_mps",
    "model_params",
    "model_layers",
    "gpu_tflops",
    "quantum_ps",
)
CONFIG_KEYS = REQUIRED_KEYS + OPTIONAL_KEYS


@dataclass(frozen=True)
class _Entry:
    value: str
    line: Optional[int]
    column: Optional[int]


def _tokenize(text: str) -> Dict[str, _Entry]:
    """Split a key=value document into entries, reporting syntax errors by position."""
    entries: Dict[str, _Entry] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        eq = line.find("=")
        if eq < 0:
            column = len(line) - len(line.lstrip()) + 1
            raise ParseError("expected 'key = value'", lineno, column)
        key = line[:eq].strip()
        key_column = len(line) - len(line.lstrip()) + 1
        if not _KEY_RE.match(key):
            raise ParseError(f"invalid key {key!r}", lineno, key_column)
        value = line[eq + 1:].strip()
        value_column = eq + 2 + (len(line[eq + 1:]) - len(line[eq + 1:].lstrip()))
        if not value:
            raise ParseError(f"missing value for {key!r}", lineno, eq + 2)
        if key in entries:
            raise ParseError(f"duplicate key {key!r}", lineno, key_column)
        if key not in CONFIG_KEYS:
            raise ConfigError(f"unknown key: {key} (line {lineno})")
        entries[key] = _Entry(value, lineno, value_column)
    return entries


def _integer(entry: _Entry, key: str) -> int:
    number = _decimal(entry, key)
    if number != number.to_integral_value():
        raise ParseError(f"{key} must be an integer, got {entry.value!r}", entry.line, entry.column)
    return int(number)


def _decimal(entry: _Entry, key: str) -> Decimal:
    try:
        return parse_decimal(entry.value)
    except ValueError as e:
        raise ParseError(f"{key}: {e}", entry.line, entry.column)


def _scaled(entry: _Entry, key: str, scale: Union[int, Decimal]) -> float:
    try:
        return scaled_float(entry.value, scale)
    except ValueError as e:
        raise ParseError(f"{key}: {e}", entry.line, entry.column)


def _preset(entry: _Entry, key: str, table: Dict) -> object:
    name = entry.value.lower()
    if name not in table:
        raise ConfigError(
            f"unknown {key} preset: {entry.value!r} (known: {', '.join(sorted(table))})"
        )
    return table[name]


def build_config(entries: Dict[str, _Entry]) -> JobConfig:
    """Resolve presets, apply defaults and build an (unvalidated) JobConfig."""
    for key in REQUIRED_KEYS:
        if key not in entries:
            raise ConfigError(f"missing required key: {key}")

    def opt(key: str, convert: Callable[[_Entry, str], object]) -> Optional[object]:
        return convert(entries[key], key) if key in entries else None

    model: ModelSpec = _preset(entries["model"], "model", MODEL_PRESETS)
    model_updates = {
        "parameter_count": opt("model_params", _integer),
        "layer_count": opt("model_layers", _integer),
        "grad_bytes_per_param": opt("grad_bytes_per_param", _integer),
    }
    model = model.model_copy(update={k: v for k, v in model_updates.items() if v is not None})

    gpu: GpuSpec = _preset(entries["gpu"], "gpu", GPU_PRESETS)
    tflops = opt("gpu_tflops", lambda e, k: _scaled(e, k, TFLOPS))
    if tflops is not None:
        gpu = gpu.model_copy(update={"peak_flops": tflops})

    kind = _preset(entries["fiber"], "fiber", FIBER_PRESETS)
    fiber = FiberType.of(kind, opt("fiber_speed_mps", lambda e, k: _scaled(e, k, 1)))

    total_gpus = _integer(entries["total_gpus"], "total_gpus")
    if total_gpus < 2 or total_gpus % 2:
        entry = entries["total_gpus"]
        raise ConfigError(
            f"total_gpus must be an even count >= 2 split over two datacenters, got {total_gpus}"
            f" (line {entry.line})"
        )

    topology_fields = {
        "gpus_per_dc": total_gpus // 2,
        "inter_distance": _scaled(entries["inter_distance_km"], "inter_distance_km", KM),
        "fiber": fiber,
        "inter_bandwidth": opt("inter_bandwidth_gbytes", lambda e, k: _scaled(e, k, GBYTES)),
        "intra_bandwidth": opt("intra_bandwidth_gbytes", lambda e, k: _scaled(e, k, GBYTES)),
        "intra_latency": opt("intra_latency_us", lambda e, k: _scaled(e, k, MICRO)),
    }
    topology = TopologySpec(**{k: v for k, v in topology_fields.items() if v is not None})

    job_fields = {
        "tokens_per_gpu": opt("tokens_per_gpu", _integer),
        "bucket_bytes": opt("bucket_mbytes", lambda e, k: _exact_int(e, k, MBYTES)),
        "optimizer_step_seconds": opt("optimizer_step_ms", lambda e, k: _scaled(e, k, MILLI)),
        "inter_traversals": opt("inter_traversals", _integer),
        "compute_efficiency": opt("compute_efficiency", lambda e, k: _scaled(e, k, 1)),
        "quantum_ps": opt("quantum_ps", _integer),
    }
    return JobConfig(
        model=model,
        gpu=gpu,
        topology=topology,
        **{k: v for k, v in job_fields.items() if v is not None},
    )


def _exact_int(entry: _Entry, key: str, scale: int) -> int:
    number = _decimal(entry, key) * scale
    if number != number.to_integral_value():
        raise ParseError(f"{key} must resolve to whole bytes, got {entry.value!r}", entry.line, entry.column)
    return int(number)


def config_to_pairs(config: JobConfig) -> Dict[str, str]:
    """
    Flatten a JobConfig into scenario-file key/value text, in schema order.

    Preset override keys are only written when they differ from the preset,
    so swapping ``model`` or ``gpu`` in a sweep does not drag stale values.
    """
    topo = config.topology
    for name, table in (("model", MODEL_PRESETS), ("gpu", GPU_PRESETS)):
        preset = getattr(config, name).name
        if preset not in table:
            raise ConfigError(f"{name} {preset!r} is not a known preset and cannot be serialized")
    if topo.dc_count != 2:
        raise ConfigError(f"only two-datacenter configs can be serialized, got {topo.dc_count}")
    pairs = {
        "model": config.model.name,
        "gpu": config.gpu.name,
        "fiber": topo.fiber.kind.value,
        "total_gpus": str(topo.total_gpus),
        "inter_distance_km": unscaled_text(topo.inter_distance, KM),
        "inter_bandwidth_gbytes": unscaled_text(topo.inter_bandwidth, GBYTES),
        "intra_bandwidth_gbytes": unscaled_text(topo.intra_bandwidth, GBYTES),
        "intra_latency_us": unscaled_text(topo.intra_latency, MICRO),
        "tokens_per_gpu": str(config.tokens_per_gpu),
        "bucket_mbytes": unscaled_text(config.bucket_bytes, MBYTES),
        "grad_bytes_per_param": str(config.model.grad_bytes_per_param),
        "optimizer_step_ms": unscaled_text(config.optimizer_step_seconds, MILLI),
        "inter_traversals": str(config.inter_traversals),
        "compute_efficiency": unscaled_text(config.compute_efficiency, 1),
        "quantum_ps": str(config.quantum_ps),
    }
    model_preset = MODEL_PRESETS[config.model.name]
    if config.model.parameter_count != model_preset.parameter_count:
        pairs["model_params"] = str(config.model.parameter_count)
    if config.model.layer_count != model_preset.layer_count:
        pairs["model_layers"] = str(config.model.layer_count)
    if config.gpu.peak_flops != GPU_PRESETS[config.gpu.name].peak_flops:
        pairs["gpu_tflops"] = unscaled_text(config.gpu.peak_flops, TFLOPS)
    if topo.fiber != FiberType.of(topo.fiber.kind):
        pairs["fiber_speed_mps"] = unscaled_text(topo.fiber.propagation_speed, 1)
    return {key: pairs[key] for key in CONFIG_KEYS if key in pairs}


def pairs_to_config(pairs: Dict[str, str], check: bool = True) -> JobConfig:
    """Build a config from already split key/value text, validated unless check is False."""
    entries = {}
    for key, value in pairs.items():
        if key not in CONFIG_KEYS:
            raise ConfigError(f"unknown key: {key}")
        entries[key] = _Entry(str(value), None, None)
    config = build_config(entries)
    return validate(config) if check else config


def parse_config(text: str) -> JobConfig:
    """
    Parse a scenario document into a validated JobConfig.

    Raises:
        ParseError: malformed line (with line/column)
        ConfigError: unknown key, unknown preset or missing required key
        ConfigValidationError: values outside the invariant ranges
    """
    config = build_config(_tokenize(text))
    return validate(config)


def serialize_config(config: JobConfig) -> str:
    lines = [f"{key} = {value}" for key, value in config_to_pairs(config).items()]
    return "\n".join(lines) + "\n"


def parse_config_file(file_path: Union[str, Path]) -> JobConfig:
    if not is_valid_file_path(file_path):
        raise FileNotFoundError(f"Invalid or non-existent file: {file_path}")
    logger.debug("parsing scenario file %s", file_path)
    return parse_config(load_text(file_path))


def tokenize_sweep(text: str) -> Tuple[Dict[str, str], Dict[str, List[str]]]:
    """
    Split a sweep document into single-valued keys and list-valued axes.

    Every key accepts a comma-separated list; ``inter_distance_km`` also
    accepts ``lo:hi:steps`` geometric ranges.
    """

    singles: Dict[str, str] = {}
    axes: Dict[str, List[str]] = {}
    for key, entry in _tokenize(text).items():
        values: List[str] = []
        for part in entry.value.split(","):
            part = part.strip()
            if not part:
                raise ParseError(f"empty list element in {key!r}", entry.line, entry.column)
            if ":" in part:
                if key != "inter_distance_km":
                    raise ParseError(
                        f"ranges are only supported for inter_distance_km, not {key!r}",
                        entry.line,
                        entry.column,
                    )
                values.extend(_expand_range(part, entry))
            else:
                values.append(part)
        if len(values) == 1:
            singles[key] = values[0]
        else:
            axes[key] = values
    return singles, axes


def _expand_range(part: str, entry: _Entry) -> List[str]:
    pieces = part.split(":")
    if len(pieces) != 3:
        raise ParseError(f"range must be lo:hi:steps, got {part!r}", entry.line, entry.column)
    try:
        lo, hi = (parse_decimal(p) for p in pieces[:2])
        steps = int(pieces[2])
    except ValueError as e:
        raise ParseError(f"bad range {part!r}: {e}", entry.line, entry.column)
    try:
        return [repr(v) for v in geometric_range(float(lo), float(hi), steps)]
    except ValueError as e:
        raise ParseError(str(e), entry.line, entry.column)
