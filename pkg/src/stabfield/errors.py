"""Exception types raised by the estimation pipeline."""


class StabfieldError(Exception):
    """Base class for pipeline errors that carry a machine-readable code."""

    code = "error"

    def to_dict(self):
        return {"error": self.code, "message": str(self)}


class SingularSystem(StabfieldError):
    """The promise matrix has zero determinant; the log-linear system cannot be solved."""

    code = "singular_system"


class DegenerateRate(StabfieldError):
    """A rate difference is zero, so its logarithm is undefined."""

    code = "degenerate_rate"


class EmptyCandidateSet(StabfieldError):
    """Every candidate was filtered out. ``result`` holds the partial reconstruction."""

    code = "empty_candidate_set"

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class NumericalError(StabfieldError):
    code = "numerical_error"
