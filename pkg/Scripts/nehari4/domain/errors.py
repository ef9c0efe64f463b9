"""
Domain errors - Exception hierarchy with process exit codes
"""
from typing import List, Optional


class Nehari4Error(Exception):
    """Base class for every failure raised by nehari4"""

    exit_code: int = 1

    def __init__(self, message: str, details: Optional[List[str]] = None):
        super().__init__(message)
        self.message = message
        self.details: List[str] = list(details or [])


class ConfigError(Nehari4Error):
    """Invalid or inconsistent run configuration"""

    exit_code = 2


class GridError(Nehari4Error):
    """Grid specification or field compatibility violated"""

    exit_code = 2


class CoercivityError(Nehari4Error):
    """Operator symbol is not strictly positive on the grid"""

    exit_code = 2


class RayMissesManifoldError(Nehari4Error):
    """The ray through a field has no positive Nehari intersection"""

    exit_code = 3


class ConvergenceError(Nehari4Error):
    """Iterative solver failed to converge or diverged"""

    exit_code = 3


class PathError(Nehari4Error):
    """Mountain-pass path could not be built or relaxed"""

    exit_code = 3


class QuadratureError(Nehari4Error):
    """Adaptive quadrature did not reach the requested tolerance"""

    exit_code = 3


class FitError(Nehari4Error):
    """Expansion fit impossible (too few points, rank deficiency)"""

    exit_code = 2


class AcceptanceError(Nehari4Error):
    """At least one acceptance criterion failed"""

    exit_code = 4


class ResourceCapError(Nehari4Error):
    """Requested grid exceeds the configured memory budget"""

    exit_code = 5
