"""Exception hierarchy shared across the package."""


class CoreviewError(Exception):
    """Base class for all package-specific errors."""


class EmptyDatasetError(CoreviewError):
    """Raised when parsing produced zero valid review records."""


class InferenceError(CoreviewError):
    """Raised when belief propagation degenerates numerically."""


class ComponentTooLargeError(CoreviewError):
    """Raised when exact enumeration is asked for an oversized component."""


class MetricError(CoreviewError):
    """Raised when a ranking metric is undefined for the given inputs."""


class ConfigError(CoreviewError):
    """Raised for invalid run configuration or config-file contents."""


class PipelineError(CoreviewError):
    """Raised when a pipeline stage fails; carries the stage name."""

    def __init__(self, stage: str, message: str):
        self.stage = stage
        super().__init__(f"stage '{stage}': {message}")
