"""The network operator's side: storage barrier, revenue, utility and pricing.

Equilibrium quantities are linear in ``1/price - 1``, so the operator's
utility collapses to

    u_o(price) = (1 - price) * t - 1 / (S - (1/price - 1) * r)

with price-independent coefficients ``t`` (total quantity per unit of
``1/price - 1``) and ``r`` (the same, weighted by copies per file). The
maximiser is ``(sqrt(r/t) + r) / (S + r)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Optional, Sequence

from stackcache.errors import DomainError, InfeasibleMarket
from stackcache.follower import round_uncoded, solve_ne_linear
from stackcache.model import CpParams, MarketConfig, QuantityProfile

Parity = Literal["odd", "even", "rounded"]

# Barrier headroom below this fraction of S counts as a full cache.
BARRIER_RTOL = 1e-12


@dataclass(frozen=True)
class PriceDecision:
    price: float
    feasible_range: tuple[float, float]
    r: float
    t: float

    @property
    def lower(self) -> float:
        return self.feasible_range[0]

    @property
    def upper(self) -> float:
        return self.feasible_range[1]


def f_pm(cp: CpParams, q_m_parity: Literal["odd", "even"]) -> float:
    """Mean copies per cached file for one CP, given whether q_m is odd or even."""
    if q_m_parity == "odd":
        return cp.p_mean
    if q_m_parity == "even":
        return cp.p_mean + cp.delta_p / 2
    raise ValueError(f"parity must be 'odd' or 'even', got {q_m_parity!r}")


def copy_weights(
    config: MarketConfig, parity: Parity = "even", rounded: Optional[Sequence[int]] = None
) -> list[float]:
    """Per-CP copy weights f(p_m).

    ``parity="rounded"`` reads each CP's parity from ``rounded`` (whole-file
    quantities); otherwise every CP uses the fixed branch.
    """
    if parity == "rounded":
        if rounded is None:
            raise ValueError("parity='rounded' needs rounded quantities")
        return [f_pm(cp, "even" if n % 2 == 0 else "odd") for cp, n in zip(config.cps, rounded)]
    return [f_pm(cp, parity) for cp in config.cps]


def cached_copies(q: QuantityProfile, config: MarketConfig, parity: Parity = "even") -> float:
    """Total file copies the operator must store for profile ``q``.

    When ``q`` carries rounded quantities their parity selects each f(p_m);
    otherwise ``parity`` decides ("rounded" then falls back to "even").
    """
    if q.rounded is not None:
        weights = copy_weights(config, "rounded", q.rounded)
    else:
        weights = copy_weights(config, "even" if parity == "rounded" else parity)
    return math.fsum(x * w for x, w in zip(q.q, weights))


def mno_cost(S: float, d: float) -> float:
    """Barrier storage cost; +inf unless 0 < d < S."""
    if not S > 0:
        raise DomainError(f"capacity must be > 0, got {S}")
    if 0 < d < S:
        return 1.0 / (S - d)
    return math.inf


def mno_revenue(price: float, q: QuantityProfile) -> float:
    if not price >= 0:
        raise DomainError(f"price must be >= 0, got {price}")
    return price * q.total


def rt_coefficients(
    config: MarketConfig,
    parity: Parity = "even",
    probe_price: float = 0.5,
) -> tuple[float, float]:
    """Return ``(r, t)`` by dividing an equilibrium solve by ``1/probe_price - 1``.

    With ``parity="rounded"`` the parity of each CP is taken from the rounded
    equilibrium at the even-branch optimal price (one fixed-point pass).
    """
    if not 0 < probe_price < 1:
        raise DomainError(f"probe price must lie in (0, 1), got {probe_price}")
    q = solve_ne_linear(config, probe_price)
    scale = 1.0 / probe_price - 1.0
    if parity == "rounded":
        pi_even = optimal_price(config, parity="even").price
        weights = copy_weights(config, "rounded", round_uncoded(solve_ne_linear(config, pi_even)).rounded)
    else:
        weights = copy_weights(config, parity)
    t = math.fsum(q.q) / scale
    r = math.fsum(x * w for x, w in zip(q.q, weights)) / scale
    return r, t


def utility_from_rt(price: float, S: float, r: float, t: float) -> float:
    headroom = S - (1.0 / price - 1.0) * r
    if headroom <= BARRIER_RTOL * S:
        return -math.inf
    return (1.0 - price) * t - 1.0 / headroom


def mno_utility(price: float, config: MarketConfig, parity: Parity = "even") -> float:
    """Operator utility at ``price`` with followers at equilibrium; -inf past the barrier."""
    if not 0 < price < 1:
        raise DomainError(f"price must lie in (0, 1), got {price}")
    r, t = rt_coefficients(config, parity)
    return utility_from_rt(price, config.capacity, r, t)


def mno_utility_at(price: float, q: QuantityProfile, config: MarketConfig, parity: Parity = "even") -> float:
    """Revenue minus barrier cost for an explicit profile (e.g. rounded quantities).

    Reporting helper; pricing decisions use :func:`mno_utility`.
    """
    if q.rounded is not None:
        prof = QuantityProfile(tuple(float(n) for n in q.rounded), rounded=q.rounded)
    else:
        prof = q
    d = cached_copies(prof, config, parity)
    return mno_revenue(price, prof) - mno_cost(config.capacity, d)


def price_gradient(price: float, S: float, r: float, t: float) -> float:
    """d u_o / d price on the feasible side of the barrier."""
    return r / (S * price - (1.0 - price) * r) ** 2 - t


def feasible_price_range(config: MarketConfig, parity: Parity = "even") -> tuple[float, float]:
    r, _ = rt_coefficients(config, parity)
    return r / (config.capacity + r), 1.0


def optimal_price(config: MarketConfig, parity: Parity = "even") -> PriceDecision:
    """Closed-form revenue-maximising price and its feasible range.

    Raises:
        InfeasibleMarket: the optimum is not below 1, i.e. S <= sqrt(r/t).
    """
    r, t = rt_coefficients(config, parity)
    S = config.capacity
    price = (math.sqrt(r / t) + r) / (S + r)
    if not 0 < price < 1:
        raise InfeasibleMarket(price, r, t, S)
    lower = r / (S + r)
    if not lower < price < 1:
        raise AssertionError(f"optimal price {price} left the feasible range ({lower}, 1)")
    grad = price_gradient(price, S, r, t)
    if abs(grad) > 1e-9:
        raise AssertionError(f"stationarity residual {grad:.3g} at optimal price {price}")
    return PriceDecision(price=price, feasible_range=(lower, 1.0), r=r, t=t)
