# geo_overlap_sim/__init__.py
from .models import (
    FiberKind,
    FiberType,
    GpuSpec,
    ModelSpec,
    TopologySpec,
    JobConfig,
    MODEL_PRESETS,
    GPU_PRESETS,
)
from .validators import ConfigValidator, Violation, validate
from .parser import parse_config, parse_config_file, serialize_config
from .exceptions import (
    GeoOverlapError,
    ParseError,
    ConfigError,
    ValidationError,
    ConfigValidationError,
    WorkloadError,
    SimulationError,
    MetricsError,
    SweepError,
)
from .workload import LayerTiming, Bucket, WorkloadPlan, build_layer_timings, build_buckets
from .network import LinkSpec, propagation_delay, transfer_time, equivalent_distance
from .collective import Phase, allreduce_phases, allreduce_pipeline_time
from .engine import IterationTrace, run_iteration, run_batch
from .metrics import SweepRow, DeltaRow, overlap, delta_eta, time_multiplier
from .report import emit_csv, emit_plots
from .sweep import SweepSpec, default_sweep, expand_sweep, parse_sweep

__version__ = "0.1.0"

__all__ = [
    # Domain types
    "FiberKind",
    "FiberType",
    "GpuSpec",
    "ModelSpec",
    "TopologySpec",
    "JobConfig",
    "MODEL_PRESETS",
    "GPU_PRESETS",
    "ConfigValidator",
    "Violation",
    "SweepSpec",

    # Exceptions
    "GeoOverlapError",
    "ParseError",
    "ConfigError",
    "ValidationError",
    "ConfigValidationError",
    "WorkloadError",
    "SimulationError",
    "MetricsError",
    "SweepError",

    # Configuration
    "validate",
    "parse_config",
    "parse_config_file",
    "serialize_config",
    "parse_sweep",
    "expand_sweep",
    "default_sweep",

    # Models and simulation
    "LayerTiming",
    "Bucket",
    "WorkloadPlan",
    "build_layer_timings",
    "build_buckets",
    "LinkSpec",
    "propagation_delay",
    "transfer_time",
    "equivalent_distance",
    "Phase",
    "allreduce_phases",
    "allreduce_pipeline_time",
    "IterationTrace",
    "run_iteration",
    "run_batch",

    # Metrics and reports
    "SweepRow",
    "DeltaRow",
    "overlap",
    "delta_eta",
    "time_multiplier",
    "emit_csv",
    "emit_plots",
]
