"""Exception types shared across the library."""


class TactisimError(Exception):
    """Base class for library-specific errors."""


class ParseError(TactisimError):
    """A text input (trace CSV, channel CSV) could not be parsed."""


class SchemaError(TactisimError):
    """Structured data violates its documented schema."""


class VersionError(SchemaError):
    """A weights file declares an unsupported schema version."""


class StabilityError(TactisimError):
    """A physical or queueing stability condition is violated."""


class ConfigError(TactisimError):
    """Invalid or inconsistent experiment configuration."""
