"""Exception hierarchy shared by the library and the CLI.

The CLI maps each class to a distinct process exit code, so scripts can
tell a bad scenario file from a bad dataset from a numerical blow-up.
"""


class UncmapError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ConfigError(UncmapError):
    """Invalid scenario, geometry, or parameter configuration."""

    exit_code = 2


class DataError(UncmapError):
    """Missing, empty, or inconsistent dataset / artifact inputs."""

    exit_code = 3


class NumericError(UncmapError):
    """Numerical failure (NaN loss, divergent optimization, ...)."""

    exit_code = 4
