"""Exception hierarchy shared by every monodrome service."""

from typing import Optional


class MonodromeError(Exception):
    """Base class for all domain errors"""


class InvariantViolation(MonodromeError):
    """A type invariant failed; `invariant` names it"""

    def __init__(self, invariant: str, message: str):
        super().__init__(f"[{invariant}] {message}")
        self.invariant = invariant


class TelescopingError(InvariantViolation):
    def __init__(self, total: int, message: Optional[str] = None):
        super().__init__(
            'telescoping',
            message or f"sum of lattice degrees over all punctures is {total}, expected 0",
        )
        self.total = total


class DegenerateLatticeStep(MonodromeError):
    def __init__(self, detail: str = ''):
        text = "degenerate lattice step"
        super().__init__(f"{text}: {detail}" if detail else text)


class CollisionError(MonodromeError):
    pass


class GeometryMismatchError(MonodromeError):
    pass


class SolvabilityError(MonodromeError):
    def __init__(self, mean_defect: float, tolerance: float):
        super().__init__(
            f"solvability violated: mean defect {mean_defect:.6e} exceeds tolerance {tolerance:.1e}"
        )
        self.mean_defect = mean_defect
        self.tolerance = tolerance


class ResolutionError(MonodromeError):
    pass


class StageError(MonodromeError):
    """Wraps a failure with the pipeline stage it happened in"""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
