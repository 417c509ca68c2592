"""Exception hierarchy shared by all momentlab modules."""


class MomentLabError(Exception):
    """Base class; the CLI maps any subclass to exit code 1."""


class NonConvergence(MomentLabError):
    pass


class DegreeTooLarge(MomentLabError):
    pass


class CommonZero(MomentLabError):
    pass


class DegreeViolation(MomentLabError):
    pass


class PoleHit(MomentLabError):
    pass


class UnstablePolynomial(MomentLabError):
    pass


class UnstableShift(MomentLabError):
    pass


class DomainError(MomentLabError, ValueError):
    pass


class QuadratureFailure(MomentLabError):
    pass


class NodesTooClose(MomentLabError):
    pass


class PreconditionViolated(MomentLabError):
    pass


class Overflow(MomentLabError, OverflowError):
    pass


class RuleAuditMismatch(MomentLabError):
    """An exact classification rule disagrees with the numeric sign scan."""


class ParseError(MomentLabError, ValueError):
    pass
