"""Exception types shared across the library.

Exit-code relevant distinctions: validation problems (bad input data),
window stabilization failures (retryable by widening), and internal
invariant violations (bugs).
"""


class MomixError(Exception):
    """Base class for all library errors."""


class ValidationError(MomixError):
    """Malformed input data (bad matrix, bad JSON, bad word, ...)."""


class OrderBoundExceeded(MomixError):
    """Group enumeration passed the configured order bound."""


class NotComparable(MomixError):
    """Kazhdan-Lusztig polynomial requested for x that is not <= w."""


class NotReflectionFaithful(MomixError):
    """Realization failed the reflection-faithfulness test."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class NotReduced(ValidationError):
    """A word supplied where a reduced expression is required is not reduced."""


class WindowNotStabilized(MomixError):
    """New generators appeared in the top two degrees of a scan window.

    The window must be widened; callers with a retry policy catch this.
    """


class ZeroLabel(ValidationError):
    """An edge label (or modulus for linear reduction) is zero."""


class NotClosed(ValidationError):
    """Subset passed to a closed-inclusion functor is not downward closed."""


class NotOpen(ValidationError):
    """Subset passed to an open-inclusion functor is not upward closed."""


class NotFreeInWindow(MomixError):
    """A costalk (or other kernel submodule) failed graded-freeness
    certification on the scan window.  For corestriction this is exactly a
    failure of the Verma-flag condition at desk scale."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class LiftAmbiguous(MomixError):
    """Well-definedness check failed while localizing a sections module."""


class LiftFailure(MomixError):
    """A differential lift across a closed stratum does not exist; signals
    a bug or an insufficient window."""


class SplitFailure(MomixError):
    """Krull-Schmidt splitting failed; input is not BMP or window too small."""


class InvariantError(MomixError):
    """An internal exact invariant (d*d = 0, commuting square, ...) failed."""
