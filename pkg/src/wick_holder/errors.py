"""Exception hierarchy shared by all modules."""


class WickError(Exception):
    """Base class for every error raised by wick_holder."""


class CapacityError(WickError, ValueError):
    """A degree cap or grid budget would be exceeded."""


class DimensionMismatchError(WickError, ValueError):
    pass


class SingularOperatorError(WickError, ValueError):
    pass


class DegenerateIntegralError(WickError, ValueError):
    pass


class InadmissibleParametersError(WickError, ValueError):
    """Eigenvalue parameters violate a required inequality."""


class NotOnBoundaryError(WickError, ValueError):
    """An equality (boundary) case was required but does not hold."""


class ConfigurationError(WickError, ValueError):
    """A configuration violates its structural invariants."""


class InadmissibleConfigError(ConfigurationError):
    """The inequality was requested for a configuration outside its hypotheses."""


class NoWitnessError(WickError, ValueError):
    """A sharpness witness was requested for an admissible configuration."""
