"""Exception hierarchy.

Every error carries a machine-readable ``code`` so the CLI can report it
without string matching.
"""

from __future__ import annotations


class BudgetPDSError(Exception):
    code = "Error"

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)
        self.message = message or self.code

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


# instance validation (standing assumptions)
class InstanceError(BudgetPDSError, ValueError):
    code = "InvalidInstance"

    def __init__(self, message: str = "", violations: list | None = None):
        super().__init__(message)
        self.violations: list[InstanceError] = violations if violations is not None else [self]


class AsymmetricInfluence(InstanceError):
    code = "AsymmetricInfluence"


class NonzeroSelfLoop(InstanceError):
    code = "NonzeroSelfLoop"


class DisconnectedGraph(InstanceError):
    code = "DisconnectedGraph"


class NonpositiveParameter(InstanceError):
    code = "NonpositiveParameter"


class DimensionMismatch(BudgetPDSError, ValueError):
    code = "DimensionMismatch"


# projections
class NonpositiveWeight(BudgetPDSError, ValueError):
    code = "NonpositiveWeight"


class InfeasiblePoint(BudgetPDSError, ValueError):
    code = "InfeasiblePoint"


# integration
class InfeasibleStart(InfeasiblePoint):
    code = "InfeasibleStart"


class StepTooLarge(BudgetPDSError, ValueError):
    code = "StepTooLarge"


# equilibria and structure
class SingularJacobian(BudgetPDSError, ArithmeticError):
    code = "SingularJacobian"


class NonpositiveDTilde(BudgetPDSError, ValueError):
    code = "NonpositiveDTilde"


class NotPSD(BudgetPDSError, ValueError):
    code = "NotPSD"


class NoConvergence(BudgetPDSError, RuntimeError):
    code = "NoConvergence"


class AssumptionViolated(BudgetPDSError, ValueError):
    code = "AssumptionViolated"


class ZeroInfluenceSum(BudgetPDSError, ZeroDivisionError):
    code = "ZeroInfluenceSum"
