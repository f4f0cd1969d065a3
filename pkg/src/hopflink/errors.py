"""Exception hierarchy shared by every module of the package."""


class HopfLinkError(Exception):
    """Base class for all package errors."""


class MoveError(HopfLinkError):
    """A rewrite was requested on terms it does not apply to."""


class MismatchedMove(MoveError):
    pass


class ParityError(MoveError):
    pass


class PreconditionError(HopfLinkError):
    pass


class HopfMismatch(HopfLinkError):
    """Two objects that must share a Hopf invariant do not."""


class NonTermination(HopfLinkError):
    """An iteration exceeded its proven step bound (an engine bug)."""


class InvalidPermutation(HopfLinkError):
    pass


class SizeMismatch(HopfLinkError):
    pass


class Infeasible(HopfLinkError):
    pass


class InconsistentBlock(HopfLinkError):
    pass


class DegenerateProjection(HopfLinkError):
    pass


class RatioOutOfRange(HopfLinkError):
    pass


class InsufficientData(HopfLinkError):
    pass


class MalformedInput(HopfLinkError):
    pass
