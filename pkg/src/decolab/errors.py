"""Exception types raised by decolab."""


class DecolabError(ValueError):
    """Base class for input and validation errors."""


class NonSquare(DecolabError):
    pass


class NonHermitian(DecolabError):
    pass


class DimMismatch(DecolabError):
    pass


class EmptyKeep(DecolabError):
    pass


class NotAState(DecolabError):
    pass


class BadRank(DecolabError):
    pass


class NotBipartite(DecolabError):
    pass


class NotRankOne(DecolabError):
    pass


class BadPartition(DecolabError):
    pass


class NotPure(DecolabError):
    pass


class NotTracePreserving(DecolabError):
    pass


class InconsistentMarginal(DecolabError):
    pass


class BadDelta(DecolabError):
    pass


class NoConvergence(RuntimeError):
    """An iterative solver stopped before meeting its residual target."""
