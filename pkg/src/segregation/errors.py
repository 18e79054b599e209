"""Exception types shared by all modules.

Every error carries a short machine-readable ``code`` (e.g. ``"domain"``,
``"particle-collision"``) so callers and the CLI can branch on it.
"""


class SegregationError(Exception):
    """Base class. ``code`` names the failure kind."""

    def __init__(self, code, message=""):
        self.code = code
        super().__init__(f"{code}: {message}" if message else code)


class InputError(SegregationError, ValueError):
    """Malformed arguments: bad domains, mismatched grids, unordered states."""


class NumericalFailure(SegregationError, RuntimeError):
    """A computation ran but did not produce a trustworthy answer."""

    def __init__(self, code, message="", state=None):
        super().__init__(code, message)
        self.state = state


class ConfigError(SegregationError, ValueError):
    """Problems in an experiment config file."""

    def __init__(self, message, line=None, field=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__("config", prefix + message)
        self.line = line
        self.field = field
