from typing import List, Optional


class GeoOverlapError(Exception):
    """Base error for the simulator."""
    pass


class ParseError(GeoOverlapError):
    """Error parsing a scenario or sweep document."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}, column {column or 1}: {message}"
        super().__init__(message)


class ConfigError(GeoOverlapError):
    """Unknown key, unknown preset or missing required key."""
    pass


class ValidationError(GeoOverlapError):
    """Base validation error."""
    pass


class ConfigValidationError(ValidationError):
    """One or more configuration invariants are violated."""

    def __init__(self, violations: List["Violation"]):  # noqa: F821
        self.violations = list(violations)
        details = "; ".join(str(v) for v in self.violations)
        super().__init__(f"{len(self.violations)} invariant violation(s): {details}")


class WorkloadError(GeoOverlapError):
    """FLOP or duration counter would overflow."""
    pass


class SimulationError(GeoOverlapError):
    """The event loop was misconfigured or ran away."""
    pass


class MetricsError(GeoOverlapError):
    """Derived quantity or report cannot be produced."""
    pass


class SweepError(GeoOverlapError):
    """Sweep expansion failed."""

    def __init__(self, message: str, errors: Optional[List[str]] = None):
        self.errors = list(errors or [])
        super().__init__(message)
