"""Exception types shared across the package."""


class CsfError(Exception):
    """Base class for all csflab errors."""


class InvalidInputError(CsfError):
    """Malformed or inconsistent input (wrong shapes, mismatched grids, NaNs)."""


class DegenerateCurveError(InvalidInputError):
    """Curve has zero length, repeated points, or too few samples."""


class ExtinctSolutionError(CsfError):
    """Closed-form solution requested past its extinction time."""


class OutOfDomainError(CsfError):
    """Evaluation outside the domain of a closed-form solution or transform."""


class GluingInfeasibleError(CsfError):
    """Multi-reaper gluing requested at a time where the tips are too close."""


class StabilityError(CsfError):
    """Time step violates the stability restriction of the chosen scheme."""


class EmbeddednessViolationError(CsfError):
    """A flow step produced a self-intersection on a curve flagged embedded."""


class GraphicalityLostError(CsfError):
    """Graph evolution produced slopes beyond the graphicality threshold."""


class HypothesisViolationError(CsfError):
    """Standing hypothesis of the rescaled-flow analysis not met (e.g. small radius)."""


class RegionUndefinedError(CsfError):
    """Finger region is not well defined (wrong axis-crossing count)."""


class TrackingError(CsfError):
    """A feature could not be tracked across snapshots."""


class NotInRegimeError(CsfError):
    """Requested fit/diagnostic needs a regime (e.g. unstable-mode dominance) that is absent."""


class ResolutionError(CsfError):
    """Mesh too coarse to resolve the requested feature."""


class ConfigError(CsfError):
    """Bad experiment configuration (unknown keys, untyped values, missing files)."""
