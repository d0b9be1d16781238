"""Exception types raised across the package."""


class GapCollapse(ArithmeticError):
    """Two tracked levels became degenerate where a gap is divided by."""


class QuadratureError(ArithmeticError):
    """A refined quadrature failed to converge."""


class InterpolationError(ValueError):
    """A polynomial boundary-condition system could not be solved reliably."""


class IntegratorError(ArithmeticError):
    """Time stepping failed to reach the requested tolerance."""


class DegenerateCombination(ArithmeticError):
    """The weighted combination of branch states vanished."""


class BoundaryNotFlat(ValueError):
    """Low-order Hamiltonian derivatives do not vanish at the boundaries."""


class SpectrumNotSymmetric(ValueError):
    """The spectrum of H(f) differs from that of H(1 - f)."""


class SingularSystem(ArithmeticError):
    """The gap-integral matrix has (numerically) zero determinant."""


class NoPositiveTimes(ValueError):
    """No integer offsets in the scan range yield positive evolution times."""


class PhaseMatchingImpossible(ValueError):
    """The second-transition phase condition cannot be met."""


class IdenticalPaths(ValueError):
    """A scheme was given two identical branch paths."""


class DuplicateBranches(ValueError):
    """A multi-branch scheme collapsed onto fewer distinct branches."""


class SmoothnessError(ArithmeticError):
    """Hamiltonian derivatives blew up while estimating a smoothness constant."""
