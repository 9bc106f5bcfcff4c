"""Exception types shared across the package."""


class ParseError(ValueError):
    """Malformed input file content; message carries file and line number."""

    def __init__(self, path, line_no, message):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = str(path)
        self.line_no = line_no


class ValidationError(ValueError):
    """Data violates an invariant (negative weight, fraud > total, ...)."""


class ConfigError(ValueError):
    """Invalid configuration or unusable input for an operation."""
