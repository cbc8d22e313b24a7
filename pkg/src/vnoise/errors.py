"""Exception types shared across the package.

The CLI maps these onto distinct exit codes, so keep the split:
configuration problems (bad user input) vs. numerical guards
(resolution or stability limits tripped at run time).
"""


class ConfigError(ValueError):
    """A scenario configuration is invalid. Message names the offending field."""


class NumericalGuardError(RuntimeError):
    """A resolution or stability guard rejected the requested computation."""
