"""Exception types shared across the package."""


class DomainError(ValueError):
    """A parameter or argument lies outside its admissible domain."""


class NotOverloadedError(DomainError):
    """Raised by analytics that are defined only when p*alpha > mu*horizon."""


class DegenerateNoiseError(DomainError):
    """Raised when the diffusion coefficient vanishes (p = 1 and cs2 = 0)."""


class SizeMismatchError(ValueError):
    """Schedule, realization, and instance sizes disagree."""


class MassMismatchError(ValueError):
    """A cumulative control does not carry the required total mass."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to converge to the requested tolerance."""
