"""Exception hierarchy. Library code raises these; main.run maps them to exit codes."""

from typing import Optional


class SurfaceSpinError(Exception):
    """Base class for every error raised by the toolkit"""
    exit_code = 1


class InputError(SurfaceSpinError):
    """Inputs violate a precondition"""
    exit_code = 2


class UnsupportedSurfaceError(InputError):
    pass


class InvalidSiteError(InputError):
    pass


class IncompleteTerminationError(InputError):
    pass


class TerminationError(InputError):
    pass


class ConfigError(InputError):
    pass


class StructureParseError(InputError):
    """Malformed structure file. Carries the line number and the field that failed"""

    def __init__(self, path: str, line: int, field: str, detail: str = ""):
        self.path = path
        self.line = line
        self.field = field
        message = f"{path}:{line}: bad {field}"
        if detail:
            message += f" ({detail})"
        super().__init__(message)


class GeometryError(SurfaceSpinError):
    """Structure violates a geometric invariant (overlap, over-coordination, narrow terrace)"""
    exit_code = 2


class NumericalError(SurfaceSpinError):
    """A numerical procedure could not produce a trustworthy result"""
    exit_code = 3


class SingularityError(NumericalError):
    def __init__(self, distance: float, limit: Optional[float] = None):
        self.distance = distance
        text = f"nucleus lies {distance:.3g} A from a spin site"
        if limit is not None:
            text += f" (minimum {limit} A)"
        super().__init__(text)
