"""Exception hierarchy shared by all modules."""


class QrdynError(Exception):
    pass


class DomainError(QrdynError, ValueError):
    """Input lies outside the domain of the operation."""


class BeamRangeError(QrdynError, OverflowError):
    """Beam height too large to exponentiate in double precision."""


class OmittedValueError(QrdynError, ValueError):
    """Attempt to invert an automorphic map at one of its omitted values."""


class DegenerateTargetError(QrdynError, ValueError):
    """Target too close to a critical value for a reliable preimage count."""


class BranchPointError(QrdynError, ValueError):
    """Base point of a linearizer has a nontrivial stabilizer."""


class NotFixedPointError(QrdynError, ValueError):
    pass


class ConfigError(QrdynError, ValueError):
    pass
