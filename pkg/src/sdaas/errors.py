class ValidationError(ValueError):
    """Input data or arguments violate a model constraint."""


class MissingWindError(RuntimeError):
    """A segment was evaluated before wind was assigned to it."""
