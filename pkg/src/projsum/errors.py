"""Exception types shared across the package."""


class ProjsumError(Exception):
    pass


class DimensionCapExceeded(ProjsumError):
    def __init__(self, dimension, cap):
        super().__init__(f"dimension {dimension} exceeds cap {cap}")
        self.dimension = dimension
        self.cap = cap


class NotPSD(ProjsumError):
    pass


class Infeasible(ProjsumError):
    """Fillmore's criterion fails; ``reason`` is NonIntegerTrace or RankExceedsTrace."""

    def __init__(self, reason, detail=""):
        super().__init__(f"{reason}: {detail}" if detail else reason)
        self.reason = reason


class MajorizationFailure(ProjsumError):
    pass


class GroupMismatch(ProjsumError):
    pass


class NonTorsionGroup(ProjsumError):
    pass


class EmptyInterval(ProjsumError):
    pass


class OutOfRange(ProjsumError):
    pass


class NegativeCoefficient(ProjsumError):
    pass


class NotDecomposable(ProjsumError):
    def __init__(self, reason):
        super().__init__(reason)
        self.reason = reason


class ElementParseError(ProjsumError):
    def __init__(self, message, position):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class CertificateFormatError(ProjsumError):
    pass
