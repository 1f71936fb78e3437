"""Exception hierarchy shared by the engines and the command line."""


class TropDescError(Exception):
    """Base class for all errors raised by this package."""


class InvariantSyntaxError(TropDescError, ValueError):
    def __init__(self, message: str, position: int, text: str = ""):
        self.position = position
        self.text = text
        super().__init__(f"{message} (at position {position})")


class DimensionError(TropDescError, ValueError):
    """The intersection product is not zero-dimensional."""


class UnsupportedShape(TropDescError):
    """The invariant lies outside the shapes the engines can handle."""


class BaseUnavailable(TropDescError):
    def __init__(self, invariant):
        self.invariant = invariant
        super().__init__(f"no base value available for {invariant}")


class NonGeneralConfig(TropDescError):
    """A configuration hit a degenerate position (zero length, ray root, ...)."""


class DegreeTooLarge(TropDescError, ValueError):
    pass


class CacheConflict(TropDescError):
    pass


class ShapeViolation(TropDescError, ValueError):
    """An operation was applied to an object of the wrong shape."""
