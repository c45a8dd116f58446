"""Exception types shared across the toolkit."""

from __future__ import annotations


class IpcFusionError(Exception):
    """Base class for domain errors (bad data, bad configuration).

    ``stage`` names the pipeline stage the error surfaced in, when known.
    """

    stage: str | None = None

    def __init__(self, message: str = "", stage: str | None = None):
        super().__init__(message)
        if stage is not None:
            self.stage = stage


class MalformedIpc(IpcFusionError, ValueError):
    pass


class LevelUnavailable(IpcFusionError, ValueError):
    pass


class LevelOrderViolation(IpcFusionError, ValueError):
    pass


class UnreadableSource(IpcFusionError):
    pass


class EmptyCorpus(IpcFusionError):
    pass


class EmptySpec(IpcFusionError, ValueError):
    pass


class InsufficientData(IpcFusionError):
    pass


class DegenerateSeries(IpcFusionError):
    pass


class SinkWriteFailure(IpcFusionError):
    pass


class ConfigError(IpcFusionError):
    pass


class NonConvergence(RuntimeWarning):
    """Issued when a curve fit stops on the iteration cap; the best iterate is still returned."""
