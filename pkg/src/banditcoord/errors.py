"""Shared exception types."""


class CapacityError(RuntimeError):
    """An exhaustive operation was asked to run beyond its stated size cap."""


class ConnectivityError(RuntimeError):
    """A graph-based algorithm required a (strongly) connected network."""


class DegenerateObjectiveError(RuntimeError):
    """The objective carries no usable signal (e.g. all singleton values are zero)."""


class AuditError(RuntimeError):
    """A runtime audit (bandwidth, locality, evaluation count) failed."""


class ConfigError(ValueError):
    """A scenario config file failed to parse or validate."""
