"""Failures the command line turns into exit codes."""


class BenchError(Exception):
    exit_code = 1


class ConfigError(BenchError):
    """Invalid experiment configuration."""
    exit_code = 2


class RunFailure(BenchError):
    """A model could not produce a result (every grid point or run failed)."""
    exit_code = 3
