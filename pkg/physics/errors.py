# physics/errors.py
from __future__ import annotations

from typing import Optional

__all__ = [
    "FracwaveError",
    "DomainError",
    "NumericalError",
    "ArtifactError",
    "GammaPoleError",
    "MLDomainError",
    "NonFiniteError",
    "KernelConvergenceError",
    "ExtrapolationError",
    "EigensolverError",
    "SingularSystemError",
    "NoGrowthWindow",
    "TensorBudgetError",
    "PolynomialBudgetError",
]


class FracwaveError(Exception):
    """Base class. `exit_code` is what the CLI returns when this escapes a run."""

    exit_code = 3


# ---------------- Families ----------------
class DomainError(FracwaveError, ValueError):
    exit_code = 2


class NumericalError(FracwaveError, ArithmeticError):
    exit_code = 3


class ArtifactError(FracwaveError, OSError):
    exit_code = 4


# ---------------- Domain ----------------
class GammaPoleError(DomainError):
    def __init__(self, x) -> None:
        super().__init__(f"gamma has a pole at non-positive integer {x!r}")
        self.x = x


class MLDomainError(DomainError):
    pass


class TensorBudgetError(DomainError):
    def __init__(self, requested: int, budget: int) -> None:
        super().__init__(
            f"overlap tensor needs {requested} entries, budget is {budget}; select a smaller mode window"
        )
        self.requested = requested
        self.budget = budget


class PolynomialBudgetError(DomainError):
    pass


# ---------------- Numerical ----------------
class NonFiniteError(NumericalError):
    def __init__(self, what: str, step: Optional[int] = None) -> None:
        where = f" at step {step}" if step is not None else ""
        super().__init__(f"non-finite values in {what}{where}")
        self.step = step


class KernelConvergenceError(NumericalError):
    def __init__(self, requested: float, achieved: float, detail: str = "") -> None:
        msg = f"quadrature did not converge: requested {requested:.3e}, achieved {achieved:.3e}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)
        self.requested = requested
        self.achieved = achieved


class ExtrapolationError(NumericalError):
    pass


class EigensolverError(NumericalError):
    pass


class SingularSystemError(NumericalError):
    pass


class NoGrowthWindow(NumericalError):
    pass
