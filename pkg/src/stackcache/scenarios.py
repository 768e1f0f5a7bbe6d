"""Parameter sweeps behind the ``price-sweep`` and ``cp-sweep`` commands."""

from __future__ import annotations

import math
from typing import Literal, Optional, Sequence

import numpy as np

from stackcache import follower, leader
from stackcache.leader import Parity
from stackcache.model import CpParams, MarketConfig, validate_market

AlphaRule = Literal["shifted", "config"]

PRICE_SWEEP_COLUMNS = ["S", "pi", "u_o", "R_o", "C_o", "d", "feasible", "optimal"]
CP_SWEEP_COLUMNS = ["M", "m", "alpha", "pi_star", "q_star", "u_star", "u_half", "u_double", "u_o"]


def leader_point(config: MarketConfig, price: float, parity: Parity = "even") -> dict:
    """Leader revenue, cost and utility at ``price`` with followers at equilibrium."""
    q = follower.solve_ne_linear(config, price)
    S = config.capacity
    d = leader.cached_copies(q, config, parity)
    revenue = leader.mno_revenue(price, q)
    cost = leader.mno_cost(S, d)
    return {
        "S": S,
        "pi": price,
        "u_o": revenue - cost,
        "R_o": revenue,
        "C_o": cost,
        "d": d,
        "feasible": 0 < d < S,
    }


def price_sweep(
    config: MarketConfig,
    capacities: Optional[Sequence[float]] = None,
    lower: Optional[float] = None,
    upper: Optional[float] = None,
    grid: int = 1000,
    price: Optional[float] = None,
    parity: Parity = "even",
) -> list[dict]:
    """Leader utility curves over price, one per capacity in ``capacities``.

    Without explicit bounds each curve spans the interior of its own feasible
    range. The optimal price is inserted into every curve that brackets it and
    flagged in the ``optimal`` column. A single ``price`` gives one row per
    capacity instead of a grid.

    Raises:
        ValueError: bounds outside (0, 1), lower >= upper, or grid < 2.
        InfeasibleMarket: some capacity admits no optimal price below 1.
    """
    if price is None and grid < 2:
        raise ValueError(f"grid must be >= 2, got {grid}")
    for name, b in (("lower", lower), ("upper", upper), ("price", price)):
        if b is not None and not 0 < b < 1:
            raise ValueError(f"{name}={b} must lie in (0, 1)")
    if lower is not None and upper is not None and not lower < upper:
        raise ValueError(f"lower={lower} must be below upper={upper}")

    configs = [config] if not capacities else [config.with_capacity(S) for S in capacities]
    rows = []
    for cfg in configs:
        validate_market(cfg)
        decision = leader.optimal_price(cfg, parity)
        pi_star = decision.price
        if price is not None:
            prices = [price]
        else:
            lo = decision.lower if lower is None else lower
            hi = decision.upper if upper is None else upper
            if not lo < hi:
                raise ValueError(f"empty price range ({lo}, {hi})")
            if lower is None and upper is None:
                prices = np.linspace(lo, hi, grid + 2)[1:-1].tolist()
            else:
                prices = np.linspace(lo, hi, grid).tolist()
            if lo <= pi_star <= hi and pi_star not in prices:
                prices = sorted(prices + [pi_star])
        for p in prices:
            row = leader_point(cfg, p, parity)
            row["optimal"] = p == pi_star if price is None else math.isclose(p, pi_star, rel_tol=1e-9)
            rows.append(row)
    return rows


def cps_for(config: MarketConfig, M: int, rule: AlphaRule = "shifted") -> list[CpParams]:
    """Provider list for an M-CP market.

    ``shifted`` gives CP m (1-based) alpha = M + m and copies the first
    configured CP's copy parameters; ``config`` reuses the configured CPs
    cyclically, alphas included.
    """
    base = config.cps
    if rule == "shifted":
        t = base[0]
        return [CpParams(M + m, t.p_mean, t.delta_p, t.catalog_size) for m in range(1, M + 1)]
    if rule == "config":
        return [base[m % len(base)] for m in range(M)]
    raise ValueError(f"unknown alpha rule {rule!r}")


def cp_sweep(
    config: MarketConfig,
    m_values: Sequence[int],
    rule: AlphaRule = "shifted",
    parity: Parity = "even",
) -> list[dict]:
    """Per-CP utilities at the optimal price for each market size in ``m_values``.

    For every CP the utility is evaluated at its equilibrium quantity, at half
    and at double that quantity, the other CPs staying at equilibrium.

    Raises:
        MarketValidationError: the alpha rule breaks validation for some M.
    """
    rows = []
    for M in m_values:
        cfg = validate_market(config.with_cps(cps_for(config, M, rule)))
        decision = leader.optimal_price(cfg, parity)
        pi = decision.price
        q = follower.solve_ne_linear(cfg, pi)
        u_o = leader.mno_utility(pi, cfg, parity)
        for m, (qm, cp) in enumerate(zip(q.q, cfg.cps)):
            J = q.others(m)
            rows.append(
                {
                    "M": M,
                    "m": m + 1,
                    "alpha": cp.alpha,
                    "pi_star": pi,
                    "q_star": qm,
                    "u_star": follower.cp_utility(pi, qm, J, cp.alpha),
                    "u_half": follower.cp_utility(pi, qm / 2, J, cp.alpha),
                    "u_double": follower.cp_utility(pi, 2 * qm, J, cp.alpha),
                    "u_o": u_o,
                }
            )
    return rows


def parse_m_range(text: str) -> list[int]:
    """``"2..6"`` -> [2, 3, 4, 5, 6]; a bare integer is a one-element range."""
    if ".." in text:
        a, b = text.split("..", 1)
        lo, hi = int(a), int(b)
    else:
        lo = hi = int(text)
    if lo < 1 or hi < lo:
        raise ValueError(f"bad M range {text!r}")
    return list(range(lo, hi + 1))
