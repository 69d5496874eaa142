"""Exception hierarchy shared by the library and the CLI."""


class MoranError(Exception):
    """Base class for all errors raised by moranset."""

    exit_code = 2


class ValidationError(MoranError, ValueError):
    """Malformed input: bad config, schema violation, unsupported combination."""

    exit_code = 1


class InvalidIndexError(ValidationError):
    pass


class InvalidBranchingError(ValidationError):
    pass


class CapacityError(ValidationError):
    """Requested generation count exceeds the record cap."""


class DomainError(MoranError, ValueError):
    """Numeric argument outside the domain of an operation."""


class MarkerDomainError(DomainError):
    """A marker falls outside the family's marker domain."""


class BracketError(DomainError):
    """Root of a monotone equation lies outside the search bracket."""


class DegenerateError(DomainError):
    """A node with zero diameter where a positive one is required."""
