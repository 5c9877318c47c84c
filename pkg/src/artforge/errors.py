"""Exception types shared across the package."""


class ArtforgeError(Exception):
    pass


class DimensionError(ArtforgeError, ValueError):
    pass


class NotHermitianError(ArtforgeError, ValueError):
    pass


class NotDensityMatrixError(ArtforgeError, ValueError):
    pass


class EmptyFreeSet(ArtforgeError):
    pass


class NotAffine(ArtforgeError):
    pass


class NotInDualSet(ArtforgeError, ValueError):
    pass


class PreconditionViolated(ArtforgeError):
    pass


class TOutOfRange(ArtforgeError, ValueError):
    pass


class InvalidWitnessComponents(ArtforgeError, ValueError):
    def __init__(self, failures):
        self.failures = list(failures)
        super().__init__("invalid witness components: " + "; ".join(self.failures))


class NoRdm(ArtforgeError):
    pass


class SolverFailure(ArtforgeError):
    """Raised when the interior-point solver cannot produce a certified answer."""

    def __init__(self, message, solution=None):
        super().__init__(message)
        self.solution = solution


class BoundaryAmbiguous(ArtforgeError):
    """Feasibility margin sits just below zero and no certificate verifies.

    Both candidate artifacts are attached so callers can surface them.
    """

    def __init__(self, t_star, X=None, certificate=None):
        super().__init__(f"ambiguous feasibility boundary (t* = {t_star:.3e})")
        self.t_star = t_star
        self.X = X
        self.certificate = certificate
