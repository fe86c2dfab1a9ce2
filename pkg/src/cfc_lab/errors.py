"""Exception types shared across the package."""


class CFCLabError(Exception):
    """Base class for domain errors raised by cfc_lab."""


class DuplicateLabel(CFCLabError, ValueError):
    def __init__(self, label):
        super().__init__(f"duplicate mode label {label!r}")
        self.label = label


class EmptyModeSet(CFCLabError, ValueError):
    pass


class NotNormalized(CFCLabError, ValueError):
    pass


class SinkCollision(CFCLabError, ValueError):
    pass


class InvalidParameter(CFCLabError, ValueError):
    pass


class NoRootInBracket(CFCLabError, RuntimeError):
    pass


class ZeroPostSelection(CFCLabError, ZeroDivisionError):
    pass


class UndefinedConditional(CFCLabError, ZeroDivisionError):
    pass


class GridTooNarrow(CFCLabError, ValueError):
    pass


class InvariantBreach(CFCLabError, AssertionError):
    """An internal consistency check failed (e.g. probabilities do not sum to 1)."""
