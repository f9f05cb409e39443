"""Exception types shared across the toolkit."""


class WulffkitError(Exception):
    """Base class for all toolkit errors."""


class InputError(WulffkitError):
    """Malformed or out-of-contract input (bad matrix, bad scene field, ...)."""


class DomainError(WulffkitError):
    """Evaluation requested outside the mathematical domain (e.g. gradient at 0)."""


class SolverError(WulffkitError):
    """Iterative solver failed to converge; carries the best value and its gap."""

    def __init__(self, message, best=None, gap=None):
        super().__init__(message)
        self.best = best
        self.gap = gap


class StarShapeError(WulffkitError):
    """Ray-boundary intersection failed: body is not star-shaped around its center."""


class QuadratureInconsistencyError(WulffkitError):
    """Divergence-theorem and radial volume formulas disagree beyond tolerance."""


class DegeneratePointError(WulffkitError):
    """Surface gradient vanished where a normal or shape operator was needed."""


class NonEllipticError(WulffkitError):
    """Tangential Hessian failed to be positive definite within tolerance."""


class HypothesisViolationError(WulffkitError):
    """A theorem hypothesis fails on the input (e.g. mean curvature <= 0 at a node)."""


class TruncationError(WulffkitError):
    """Requested tube radius exceeds the margin between the set and the grid box."""


class StepTooLargeError(WulffkitError):
    """Flow step degenerated the pushed tangent frame."""


class SceneError(InputError):
    """Scene file failed validation; message names the offending field."""
