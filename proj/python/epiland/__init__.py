"""Python bindings for the epiland simulator.

`Model` wraps one configuration file; `cli` runs the command-line tool
in-process with the same exit codes.
"""

from ._epiland import (
    ConfigError,
    Model,
    PreconditionError,
    SimulationAbort,
    __version__,
    cli,
    limit_measure,
    sample_increments,
)

__all__ = [
    "ConfigError",
    "Model",
    "PreconditionError",
    "SimulationAbort",
    "__version__",
    "cli",
    "limit_measure",
    "sample_increments",
]
