"""
Exceptions raised by the laboratory

Every error a run can end with derives from LabError so that the CLI error
handlers can map it to an exit status.
"""


class LabError(Exception):
    """Base class for all laboratory errors"""


class DataValidationError(LabError):
    """Used for data validation errors when deserializing a run config"""


class ConfigParseError(LabError):
    """Used when a config file cannot be parsed"""

    def __init__(self, message: str, line: int = None, key: str = None):
        super().__init__(message)
        self.line = line
        self.key = key


class NonMonotoneProfile(LabError):
    """U' changes sign or comes too close to zero"""


class InversionFailure(LabError):
    """Newton polish of U^-1 did not converge"""


class GridMismatch(LabError):
    """Two grid functions live on different grids"""


class SingularSystem(LabError):
    """Tridiagonal elimination met a vanishing pivot"""


class IllConditionedBoundarySystem(LabError):
    """The 2x2 system for the homogeneous solutions is near singular"""


class UnsupportedGeometry(LabError):
    """The requested solver is not available for this geometry"""


class NonFiniteState(LabError):
    """The evolved vorticity contains NaN or Inf"""

    def __init__(self, message: str, t: float = None):
        super().__init__(message)
        self.t = t


class InsufficientSamples(LabError):
    """Fewer samples than a fit needs inside the window"""


class NonPositiveValue(LabError):
    """A log-log fit received a value <= 0"""


class DegenerateIndexPair(LabError):
    """A printed coefficient formula has a vanishing (n^2 - m^2) denominator"""
