"""Exception types shared across the package."""


class CurvedNBodyError(Exception):
    """Base class for package errors."""


class ConstraintError(CurvedNBodyError, ValueError):
    """A point or velocity violates the unit-manifold constraints."""


class SingularConfigurationError(CurvedNBodyError, ValueError):
    """Collision, antipodal pair, or a degenerate determinant/chart."""


class ProfileError(CurvedNBodyError, ValueError):
    """A curvature profile is invalid (vanishes, changes sign, or is evaluated off-span)."""


class FrameError(CurvedNBodyError, ValueError):
    """Checker input is not in the required canonical frame or violates its preconditions."""
