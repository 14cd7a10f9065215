"""Exception types shared across the package."""


class SpecificationError(ValueError):
    """A network / model / configuration description violates its contract."""


class NumericError(RuntimeError):
    """A numerical routine could not produce a trustworthy result."""


class GapClosureError(NumericError):
    """A dark state exists at some quasi-momentum; the winding phase is undefined."""


class ResolutionError(NumericError):
    """The k-grid could not be refined enough to resolve the winding phase."""


class RootFindingError(NumericError):
    """Newton iteration on the quasi-momentum equation failed to converge."""


class PhaseBoundaryError(ValueError):
    """Parameters sit on a topological phase boundary; the invariant is undefined."""
