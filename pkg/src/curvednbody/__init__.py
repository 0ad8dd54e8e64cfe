"""N-body dynamics on the sphere and hyperbolic sphere under time-varying curvature."""

from . import curvature, dynamics, geometry, homographic, kepler, scc
from .curvature import CurvatureProfile, validate_profile
from .dynamics import SystemState, Trajectory, at_rest, force_function, force_gradient, integrate
from .errors import (ConstraintError, CurvedNBodyError, FrameError, ProfileError,
                     SingularConfigurationError)

__version__ = "0.1.0"

__all__ = [
    "curvature", "dynamics", "geometry", "homographic", "kepler", "scc",
    "CurvatureProfile", "validate_profile", "SystemState", "Trajectory", "at_rest",
    "force_function", "force_gradient", "integrate", "ConstraintError", "CurvedNBodyError",
    "FrameError", "ProfileError", "SingularConfigurationError",
]
