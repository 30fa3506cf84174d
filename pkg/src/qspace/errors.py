"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the operation's domain."""


class ResourceError(RuntimeError):
    """An enumeration would exceed a configured size bound."""


class NumericError(ArithmeticError):
    """A numerical routine failed to converge or produced non-finite values."""


class SchemaError(ValueError):
    """A JSON document does not match the expected schema.

    ``where`` names the offending field (e.g. ``wells[0].half_width``).
    """

    def __init__(self, where, message):
        self.where = where
        super().__init__(f"{where}: {message}" if where else message)
