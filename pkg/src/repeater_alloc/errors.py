class NetworkError(ValueError):
    """Malformed or invalid network input."""


class RequirementError(ValueError):
    """Requirement parameters outside their domain or unattainable."""


class ModelError(ValueError):
    """Inconsistent ILP model or assignment."""


class SolverError(RuntimeError):
    pass


class CorruptAssignmentError(RuntimeError):
    """A supposedly feasible link assignment does not decompose into paths."""


class AuditError(RuntimeError):
    """A produced plan violates one of its invariants."""

    def __init__(self, violations: list[str]):
        super().__init__(f"plan audit failed: {violations[:5]}")
        self.violations = violations


class PlanFailure(Exception):
    """Structured report of the first pipeline stage that failed.

    ``stage`` is one of ``bounds``, ``candidate-links``, ``capacity``,
    ``paths``, ``ilp`` or ``solver-limit``.
    """

    def __init__(self, stage: str, message: str, details: dict | None = None):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
        self.message = message
        self.details = details or {}

    def to_dict(self) -> dict:
        return {"stage": self.stage, "message": self.message, "details": self.details}


class SolverLimitError(PlanFailure):
    pass


class InfeasibleError(PlanFailure):
    """The instance has no plan meeting the requirements."""
