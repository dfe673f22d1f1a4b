"""Exception types shared across the package."""


class LemonError(Exception):
    pass


class DomainError(LemonError, ValueError):
    """Parameter outside the range where a construction is defined."""


class OutOfDomain(LemonError):
    """A square-root radicand went negative beyond tolerance."""

    def __init__(self, msg="", stage=None):
        super().__init__(msg)
        self.stage = stage


class Branched(LemonError):
    """Point lies on the branched locus L_{+b} or L_{-b}."""

    def __init__(self, msg="", stage=None):
        super().__init__(msg)
        self.stage = stage


class CornerHit(LemonError):
    pass


class NoIntersection(LemonError):
    pass


class NoConvergence(LemonError):
    pass


class SingularJacobian(LemonError):
    pass


class OrbitEscaped(LemonError):
    pass


class Degenerate(LemonError):
    pass


class MissingCrossing(LemonError):
    pass
