"""Exception hierarchy shared by all modules."""


class BTBError(Exception):
    """Base class for every error raised by this package."""


class ConfigMismatch(BTBError):
    pass


class NotAUnit(BTBError):
    pass


class ZeroDivisor(BTBError):
    pass


class PrecisionExhausted(BTBError):
    """Working precision is too small to decide the requested quantity."""


class NotSimple(BTBError):
    pass


class LiftNotFound(BTBError):
    pass


class NotFullRank(BTBError):
    pass


class DegenerateTriple(BTBError):
    pass


class ClosureNotReached(BTBError):
    pass


class SeedNotFound(BTBError):
    pass


class InvalidGraph(BTBError):
    pass


class UnknownVertex(BTBError):
    pass


class NotATree(BTBError):
    pass


class HypothesisViolation(BTBError):
    pass
