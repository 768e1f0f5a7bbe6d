"""Brute-force verifiers for the closed-form results.

Nothing here imports the follower or leader formulas: utilities are
re-derived from their definitions, the equilibrium system is solved exactly
with rational arithmetic and Cramer's rule, and the price optimum is found by
grid search over revenue minus barrier cost.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Literal, Optional, Sequence, Union

import numpy as np

from stackcache.model import MarketConfig, QuantityProfile

INV_PHI = (math.sqrt(5) - 1) / 2
NE_GAIN_TOL = 1e-12
GRID_EPS = 1e-6

Number = Union[int, float, Fraction]


@dataclass(frozen=True)
class OracleVerdict:
    passed: bool
    worst_violation: float
    witness: Optional[str] = None


def golden_section_max(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-10,
    gain: Optional[Callable[[float, float], float]] = None,
) -> float:
    """Maximise a unimodal ``f`` on ``[lo, hi]`` to an absolute bracket width ``tol``.

    ``gain(a, b)`` may supply ``f(b) - f(a)`` computed without cancellation;
    comparing raw values stalls once the bracket is near sqrt(eps).
    """
    if gain is None:
        gain = lambda a, b: f(b) - f(a)  # noqa: E731
    a, b = lo, hi
    x1 = b - INV_PHI * (b - a)
    x2 = a + INV_PHI * (b - a)
    while b - a > tol:
        if gain(x1, x2) > 0:
            a, x1 = x1, x2
            x2 = a + INV_PHI * (b - a)
        else:
            b, x2 = x2, x1
            x1 = b - INV_PHI * (b - a)
    x = 0.5 * (a + b)
    # Boundary maximisers: the bracket collapses next to the endpoint.
    for end in (lo, hi):
        if gain(x, end) > 0:
            x = end
    return x


def _cp_payoff(price: float, q: float, others: float, alpha: float) -> float:
    return math.log(1.0 + q / (1.0 + others / alpha)) - price * q


def _cp_gain(price: float, q_from: float, q_to: float, others: float, alpha: float) -> float:
    # payoff(q_to) - payoff(q_from), with the log ratio taken as log1p.
    base = 1.0 + others / alpha + q_from
    return math.log1p((q_to - q_from) / base) - price * (q_to - q_from)


def numeric_best_response(price: float, J_m: float, alpha: float, search_bound: float) -> float:
    """Golden-section maximiser of one CP's payoff over ``[0, search_bound]``."""
    return golden_section_max(
        lambda q: _cp_payoff(price, q, J_m, alpha),
        0.0,
        search_bound,
        tol=1e-10,
        gain=lambda a, b: _cp_gain(price, a, b, J_m, alpha),
    )


def _det(matrix: list[list[Fraction]]) -> Fraction:
    a = [row[:] for row in matrix]
    n = len(a)
    det = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            det = -det
        det *= a[col][col]
        for r in range(col + 1, n):
            factor = a[r][col] / a[col][col]
            if factor:
                for c in range(col, n):
                    a[r][c] -= factor * a[col][c]
    return det


def cramer_solve(matrix: Sequence[Sequence[Number]], rhs: Sequence[Number]) -> list[Fraction]:
    """Exact solution of a small dense system by Cramer's rule."""
    A = [[Fraction(x) for x in row] for row in matrix]
    b = [Fraction(x) for x in rhs]
    det = _det(A)
    if det == 0:
        raise ZeroDivisionError("singular system")
    out = []
    for m in range(len(b)):
        Am = [row[:m] + [b[i]] + row[m + 1 :] for i, row in enumerate(A)]
        out.append(_det(Am) / det)
    return out


def exact_ne(alphas: Sequence[Number], price: Number) -> list[Fraction]:
    """Interior equilibrium quantities as exact fractions."""
    al = [Fraction(a) for a in alphas]
    M = len(al)
    matrix = [[Fraction(1) if i == j else 1 / al[i] for j in range(M)] for i in range(M)]
    c = 1 / Fraction(price) - 1
    return cramer_solve(matrix, [c] * M)


def _unit_quantities(config: MarketConfig) -> np.ndarray:
    # Equilibrium per unit of (1/price - 1); exact, then rounded once.
    return np.array([float(x) for x in exact_ne(config.alphas, Fraction(1, 2))])


def _copy_weight(config: MarketConfig, parity: Literal["odd", "even"]) -> np.ndarray:
    if parity == "odd":
        return np.array([cp.p_mean for cp in config.cps], dtype=float)
    return np.array([cp.p_mean + cp.delta_p / 2 for cp in config.cps], dtype=float)


def leader_payoff_grid(
    config: MarketConfig, prices: np.ndarray, parity: Literal["odd", "even"] = "even"
) -> np.ndarray:
    """Revenue minus barrier cost at each price, followers at the exact equilibrium."""
    prices = np.asarray(prices, dtype=float)
    w = _unit_quantities(config)
    f = _copy_weight(config, parity)
    scale = 1.0 / prices - 1.0
    total = scale * w.sum()
    copies = scale * float(w @ f)
    S = config.capacity
    with np.errstate(divide="ignore"):
        cost = np.where((copies > 0) & (copies < S), 1.0 / (S - copies), np.inf)
    return prices * total - cost


def grid_price_bounds(config: MarketConfig, parity: Literal["odd", "even"] = "even") -> tuple[float, float]:
    w = _unit_quantities(config)
    r = float(w @ _copy_weight(config, parity))
    return r / (config.capacity + r), 1.0


def grid_argmax_price(
    config: MarketConfig, grid_points: int = 100_000, parity: Literal["odd", "even"] = "even"
) -> float:
    """Price maximising the leader payoff on a uniform grid over the feasible range.

    The range is shrunk by 1e-6 at both ends. Ties go to the smaller price.
    """
    if grid_points < 100:
        raise ValueError("grid_points must be >= 100")
    lower, upper = grid_price_bounds(config, parity)
    prices = np.linspace(lower + GRID_EPS, upper - GRID_EPS, grid_points)
    values = leader_payoff_grid(config, prices, parity)
    return float(prices[int(np.argmax(values))])


def grid_spacing(config: MarketConfig, grid_points: int = 100_000) -> float:
    lower, upper = grid_price_bounds(config)
    return (upper - lower - 2 * GRID_EPS) / (grid_points - 1)


def verify_ne(
    config: MarketConfig,
    price: float,
    q: Union[QuantityProfile, Sequence[float]],
    deviations: Sequence[float] = (0.1, -0.1, 0.01, -0.01),
) -> OracleVerdict:
    """Check that no CP gains by a unilateral move of q_m to q_m + delta (floored at 0)."""
    qs = list(q.q if isinstance(q, QuantityProfile) else q)
    worst = -math.inf
    witness = None
    for m, (qm, cp) in enumerate(zip(qs, config.cps)):
        others = math.fsum(x for i, x in enumerate(qs) if i != m)
        for delta in deviations:
            target = max(qm + delta, 0.0)
            if target == qm:
                continue
            g = _cp_gain(price, qm, target, others, cp.alpha)
            if g > worst:
                worst = g
                witness = f"CP {m + 1}: q={qm:.12g} -> {target:.12g} gains {g:.3g}"
    if worst == -math.inf:
        worst = 0.0
    passed = worst <= NE_GAIN_TOL
    return OracleVerdict(passed=passed, worst_violation=worst, witness=None if passed else witness)
