"""Exception types raised across the toolkit."""


class RoamError(Exception):
    pass


# instance validation
class InvalidInstance(RoamError, ValueError):
    pass


class DuplicateRevenue(InvalidInstance):
    pass


class NonPositiveRevenue(InvalidInstance):
    pass


class MissingNoPurchase(InvalidInstance):
    pass


class FrequencyOutOfRange(InvalidInstance):
    pass


class FrequencySumViolation(InvalidInstance):
    pass


class NegativeEta(InvalidInstance):
    pass


class IndexOutOfRange(RoamError, IndexError):
    pass


# size guards
class TooLarge(RoamError):
    pass


class ExplosionGuard(RoamError):
    pass


class GuardExceeded(RoamError):
    pass


# structural preconditions
class TupleOutOfSupport(RoamError, ValueError):
    pass


class EmptyMinimum(RoamError):
    pass


class NotTwoAssortments(RoamError):
    pass


class NotNested(RoamError):
    pass


class NotApplicable(RoamError):
    pass


class BadParams(RoamError, ValueError):
    pass


# solver outcomes
class NumericalFailure(RoamError):
    pass


class InconsistentData(RoamError):
    pass


class ThetaInfeasible(RoamError):
    pass


class NonConservativeFlow(RoamError):
    pass
