"""Exception types raised across the package."""


class SlconesError(Exception):
    """Base class for all package errors."""


class InvalidLevelError(SlconesError, ValueError):
    """A conserved level lies outside [-1, 1]."""


class DomainError(SlconesError, ValueError):
    """An argument is outside the mathematical domain of an operation."""


class FiniteEscapeError(SlconesError):
    """A strand left every bounded set in finite parameter time.

    ``escape_at`` is the estimated blow-up parameter value and ``trajectory``
    holds the computed part of the solution.
    """

    def __init__(self, escape_at, trajectory=None):
        super().__init__(f"strand escapes to infinity near s = {escape_at:.12g}")
        self.escape_at = escape_at
        self.trajectory = trajectory


class CoverageError(SlconesError, ValueError):
    """A strand was evaluated outside its integrated span."""


class ConstraintViolationError(SlconesError):
    """A quantity c_j v + 1 that must stay positive did not."""


class SingularDensityError(SlconesError):
    """The conformal density a + b v + c w is not positive."""


class IsotropicError(SlconesError):
    """The operation needs xi != 0 but the harmonic map is isotropic."""


class DegenerateAlphaError(SlconesError, ValueError):
    """alpha has a zero or repeated component, so (beta, gamma) is not determined."""


class CannotNormalizeError(SlconesError, ValueError):
    """Sign normalization needs all nine components to be nonzero."""


class DegenerateLatticeError(SlconesError, ValueError):
    """A period lattice has zero determinant."""


class ConstancyViolationError(SlconesError):
    """A quantity that must be constant over the surface varied too much."""


class ConstantPotentialError(SlconesError):
    """|B| = 1, so the potential is constant and has no period."""


class IntervalError(SlconesError, ValueError):
    """A parameter lies outside the maximal existence interval of a strand."""
