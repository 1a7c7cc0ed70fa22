"""Exception hierarchy shared by the library and the CLI."""


class NuShapError(Exception):
    """Base class for every error raised by nushap."""


class ValidationError(NuShapError, ValueError):
    """Malformed input: bad domain value, wrong arity, invalid parameter."""


class CapExceededError(ValidationError):
    """An exhaustive enumeration would exceed its configured size cap."""


class DegenerateProblemError(NuShapError):
    """The explanation problem admits no meaningful game.

    Raised when the empty set is already a weak AXp (so the characteristic
    function cannot satisfy nu(empty) = 0), among others.
    """


class ConstantModelError(DegenerateProblemError):
    """The prediction function is constant over its domain."""


class EmptyConditioningError(DegenerateProblemError):
    """No point (or row) is consistent with the conditioning set."""

    def __init__(self, features, message=None):
        self.features = tuple(sorted(features))
        super().__init__(
            message or f"no point is similar to the instance on features {list(self.features)}"
        )
