"""Exception hierarchy shared by all spinsta modules."""


class SpinstaError(Exception):
    """Base class for every error raised by this package."""


class ConfigurationError(SpinstaError, ValueError):
    """Invalid model/ansatz/run configuration (unknown kind, bad key, ...)."""


class DomainError(SpinstaError, ValueError):
    """A time or parameter lies outside the support of the object queried."""


class BasisMismatch(SpinstaError, ValueError):
    """Operands are tagged with different bases or have the wrong shape."""


class DecouplingViolation(SpinstaError):
    """Dropped levels still couple to the kept subspace."""

    def __init__(self, max_coupling: float, tol: float):
        self.max_coupling = max_coupling
        self.tol = tol
        super().__init__(
            f"dropped levels couple with magnitude {max_coupling:.3e} > tol {tol:.1e}"
        )


class DesignError(SpinstaError):
    """Inverse engineering produced singular or non-finite fields."""


class QuadratureError(SpinstaError):
    """Quadrature failed to converge or met a non-integrable singularity."""

    def __init__(self, message: str, location: float | None = None):
        self.location = location
        super().__init__(message)


class StepSizeError(SpinstaError):
    """Fixed-step integration drifted in norm beyond the allowed bound."""

    def __init__(self, drift: float, bound: float):
        self.drift = drift
        self.bound = bound
        super().__init__(f"norm drift {drift:.3e} exceeds {bound:.1e}; reduce the step")


class AlphaSearchError(SpinstaError):
    """No root and no interior minimum of a sensitivity in the search bracket."""

    def __init__(self, message: str, profile):
        self.profile = profile
        super().__init__(message)
