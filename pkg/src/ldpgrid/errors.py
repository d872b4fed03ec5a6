"""Exception types shared across the package."""


class ParameterError(ValueError):
    """An argument violates an operation's contract."""


class DomainError(ValueError):
    """A location falls outside the domain it is evaluated against."""
