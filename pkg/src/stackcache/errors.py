"""Exception types shared across the solver."""

from __future__ import annotations

from typing import TYPE_CHECKING, Sequence

if TYPE_CHECKING:
    from stackcache.follower import BrTrace
    from stackcache.model import Violation


class DomainError(ValueError):
    """An argument lies outside the domain where a formula is defined."""


class MarketValidationError(ValueError):
    """Raised with every invariant violation found in a market config."""

    def __init__(self, violations: Sequence["Violation"]):
        self.violations = list(violations)
        lines = "\n".join(f"  - {v}" for v in self.violations)
        super().__init__(f"{len(self.violations)} market violation(s):\n{lines}")


class InfeasibleMarket(ValueError):
    """The optimal price falls outside (0, 1): capacity is too small for demand."""

    def __init__(self, price: float, r: float, t: float, capacity: float):
        self.price = price
        self.r = r
        self.t = t
        self.capacity = capacity
        super().__init__(
            f"optimal price {price:.6g} is outside (0, 1) "
            f"(S={capacity:.6g}, r={r:.6g}, t={t:.6g}); capacity must exceed sqrt(r/t)"
        )


class NonConvergence(RuntimeError):
    """Best-response dynamics hit the iteration cap. The full trace is attached."""

    def __init__(self, trace: "BrTrace", tol: float):
        self.trace = trace
        self.tol = tol
        super().__init__(
            f"best-response dynamics did not reach tol={tol:g} in "
            f"{len(trace.iterations) - 1} rounds (last residual {trace.final_residual:.3g})"
        )


class SingularSystem(ArithmeticError):
    """The equilibrium linear system is singular. Unreachable for validated markets."""
