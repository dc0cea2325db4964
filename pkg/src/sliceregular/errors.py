"""Exception types shared across the package."""


class SliceRegularError(Exception):
    """Base class for all package-specific errors."""


class ZeroDivisorError(SliceRegularError):
    """Inversion of a quaternion whose norm is below tolerance."""


class DomainError(SliceRegularError):
    """Evaluation requested outside the series' ball of definition."""


class RadiusMismatchError(SliceRegularError):
    """Binary series operation between series on different balls."""


class NonInvertibleError(SliceRegularError):
    """Regular reciprocal of a series whose constant term vanishes."""


class RealPointError(SliceRegularError):
    """Spherical derivative requested at a real point."""


class RemainderError(SliceRegularError):
    """Linear star-division attempted at a point that is not a zero."""


class PoleError(SliceRegularError):
    """Classical Moebius transformation evaluated at its pole."""


class DegenerateSphereError(SliceRegularError):
    """Sphere-zero search on a sphere where the series vanishes to working order."""


class HypothesisError(SliceRegularError):
    """A certified procedure was invoked on data violating its hypotheses."""


class ManifestError(SliceRegularError):
    """Verification manifest references an unknown check or is malformed."""
