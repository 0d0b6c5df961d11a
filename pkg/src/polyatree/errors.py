"""Exception types shared across the package.

Each CLI exit code maps to one of these (see cli.EXIT_CODES).
"""


class UsageError(ValueError):
    """Invalid argument ranges or malformed inputs."""


class ResourceCapError(RuntimeError):
    """A request exceeded a configured enumeration or table cap."""


class NonConvergenceError(RuntimeError):
    """A numeric iteration failed to reach the requested accuracy."""


class ConsistencyError(RuntimeError):
    """Two independently computed routes to the same quantity disagree."""
