"""
Exception hierarchy.

Every error carries a human readable ``detail`` and the ``exit_code`` the
CLI reports, the same way an ``HTTPException`` carries its status code.
"""


class JointMajError(Exception):
    exit_code: int = 2

    def __init__(self, detail: str, *, exit_code: int | None = None):
        super().__init__(detail)
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code

    def __str__(self) -> str:
        return self.detail


# ==========================================================
# INPUT ERRORS (exit 2)
# ==========================================================
class InputError(JointMajError):
    exit_code = 2


class DimensionMismatchError(InputError):
    pass


class InvalidMeasureError(InputError):
    pass


class InvalidMatrixError(InputError):
    pass


class NotAbelianError(InputError):
    def __init__(self, commutator_norm: float, tolerance: float):
        super().__init__(
            f"not an abelian family (commutator norm {commutator_norm:.3e} > {tolerance:.3e})"
        )
        self.commutator_norm = commutator_norm


class PartitionError(InputError):
    pass


class RankMismatchError(InputError):
    pass


class MeasureMismatchError(InputError):
    pass


class HypothesisError(InputError):
    pass


# ==========================================================
# VERDICT / NUMERICAL ERRORS
# ==========================================================
class NotMajorizedError(JointMajError):
    exit_code = 1

    def __init__(self, detail: str = "not majorized"):
        super().__init__(detail)


class DivisibilityError(JointMajError):
    exit_code = 3

    def __init__(self, detail: str = "no uniform refinement at this r"):
        super().__init__(detail)


class DiagonalizationError(JointMajError):
    def __init__(self, residual: float, tolerance: float):
        super().__init__(
            f"diagonalization failed (residual {residual:.3e} > {tolerance:.3e})"
        )
        self.residual = residual


class SubstochasticError(JointMajError):
    def __init__(self, residual_mass: float):
        super().__init__(
            f"numerically sub-stochastic (no perfect matching, residual mass {residual_mass:.3e})"
        )
        self.residual_mass = residual_mass


class ResolutionCapError(JointMajError):
    def __init__(self, m: int, cap: int):
        super().__init__(f"resolution cap exceeded (m={m} > {cap})")
        self.m = m


class SolverError(JointMajError):
    pass


class LocalFormError(JointMajError):
    pass
