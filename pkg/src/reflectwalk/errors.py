"""Exception types shared across the package."""


class ReflectWalkError(Exception):
    """Base class for all package errors."""


class InvalidLaw(ReflectWalkError):
    """Increment law violates a structural invariant."""


class NonPositiveArgument(ReflectWalkError):
    """A tilt/mgf argument r must be > 0."""


class ConvergenceFailure(ReflectWalkError):
    """An iterative solver exhausted its iteration budget."""


class HorizonTooLarge(ReflectWalkError):
    """A dynamic-programming table would exceed the memory cap."""


class HorizonMismatch(ReflectWalkError):
    """Truncated series operands have different horizons."""


class RootClusterUnresolved(ReflectWalkError):
    """A factorization root sits too close to the unit circle to classify."""


class NotCentered(ReflectWalkError):
    """Operation requires a centered law (tilt first for drifted laws)."""


class NegativeDriftUnsupported(ReflectWalkError):
    """Negative-drift laws are outside the asymptotic machinery."""


class SlopeMismatch(ReflectWalkError):
    """Closed-form singularity slope disagrees with the Richardson oracle."""


class StationarityFailure(ReflectWalkError):
    """No bracket convention yields a stationary measure for the reflection kernel."""


class SingularSystem(ReflectWalkError):
    """A resolvent system is numerically singular."""


class NotInvertibleCentered(ReflectWalkError):
    """Resolvent solve called on a stochastic (centered) reflection core."""


class NoReflectionsObserved(ReflectWalkError):
    """Simulation saw zero reflections; cannot estimate the reflection law."""
