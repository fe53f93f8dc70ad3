"""Exception hierarchy shared by every simulator package."""

from typing import Optional


class SimulationError(Exception):
    """Base class for all simulator errors."""
    pass


class ConfigError(SimulationError):
    """Raised for an invalid experiment configuration."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class InvalidArgumentError(SimulationError, ValueError):
    """Raised when an operation receives an argument outside its domain."""
    pass


class NotFoundError(SimulationError, KeyError):
    """Raised when a node id is not part of the deployment."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "not found"


class DeploymentError(SimulationError):
    """Raised when a deployment cannot satisfy the CMR backbone invariant."""
    pass


class ModeViolationError(SimulationError):
    """Raised when an opportunity map is offered an observation its mode forbids."""
    pass


class NoAssignmentError(SimulationError):
    """Raised when a CMR has no channel below the busy threshold."""
    pass


class NoBackbonePathError(SimulationError):
    """Raised when a CMR has no backbone path to any portal."""
    pass


class UndefinedMetricError(SimulationError):
    """Raised when a ratio is requested over zero injected messages."""
    pass


class LogParseError(SimulationError):
    """Raised for a malformed event log or deployment line."""

    def __init__(self, line_number: int, message: str, path: Optional[str] = None):
        self.line_number = line_number
        self.path = path
        where = f"{path}:{line_number}" if path else f"line {line_number}"
        super().__init__(f"{where}: {message}")
