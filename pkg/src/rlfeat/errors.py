"""Exception types shared across the package."""


class RlfeatError(Exception):
    """Base class for all rlfeat errors."""


class NotCentered(RlfeatError):
    """Teacher activation has a nonzero Gaussian mean; labels would not be centered."""


class DegenerateTeacher(RlfeatError):
    """Teacher activation has (nearly) zero linear component <f'>; the model is undefined."""


class MomentsUnresolved(RlfeatError):
    """Quadrature for an activation's Gaussian moments failed to converge.

    Typical cause: a kink or discontinuity in the activation. Register the
    activation with exact_moments instead.
    """


class NoPhysicalRoot(RlfeatError):
    """No admissible root of a self-consistency equation could be located."""


class NoAdmissibleRoot(RlfeatError):
    """No resolvent root with nonpositive imaginary part at a spectral point."""


class SingularSystem(RlfeatError):
    """A self-consistency linear system is singular or produced non-finite values."""


class NoEdgeFound(RlfeatError):
    """Support-edge search failed to bracket a root of the discriminant."""


class DimensionOverflow(RlfeatError):
    """Requested matrix dimensions exceed the working-set memory budget."""


class SolveFailure(RlfeatError):
    """Ridge system factorization failed or returned non-finite values."""


class EigenFailure(RlfeatError):
    """Eigenvalue decomposition failed or violates positive semi-definiteness."""


class ConfigParseError(RlfeatError):
    """Malformed config text. Carries the 1-based line number."""

    def __init__(self, line_number, message):
        self.line_number = line_number
        super().__init__(f"line {line_number}: {message}")


class ConfigValidationError(RlfeatError):
    """Config parsed but violates invariants. Carries the full list of violations."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))
