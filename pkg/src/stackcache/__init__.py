"""Stackelberg pricing game between a mobile network operator and content providers.

The operator (leader) sets a per-file caching price; content providers
(followers) answer with the number of files they want cached at the small
base stations. The package computes best responses, the followers' Nash
equilibrium, the leader's optimal price, and cross-checks each of them with
brute-force oracles.
"""

from stackcache.errors import (
    DomainError,
    InfeasibleMarket,
    MarketValidationError,
    NonConvergence,
    SingularSystem,
)
from stackcache.model import (
    CpParams,
    MarketConfig,
    QuantityProfile,
    SbsFleet,
    load_market,
    market_from_dict,
    total_capacity,
    validate_market,
)
from stackcache.follower import (
    BrTrace,
    best_response,
    br_dynamics,
    cp_cost,
    cp_revenue,
    cp_utility,
    ne_closed_form,
    round_uncoded,
    solve_ne_linear,
)
from stackcache.leader import (
    PriceDecision,
    cached_copies,
    f_pm,
    feasible_price_range,
    mno_cost,
    mno_revenue,
    mno_utility,
    optimal_price,
    rt_coefficients,
)
from stackcache.stackelberg import EquilibriumReport, SolveOptions, solve_stackelberg

__version__ = "0.1.0"

__all__ = [
    "BrTrace",
    "CpParams",
    "DomainError",
    "EquilibriumReport",
    "InfeasibleMarket",
    "MarketConfig",
    "MarketValidationError",
    "NonConvergence",
    "PriceDecision",
    "QuantityProfile",
    "SbsFleet",
    "SingularSystem",
    "SolveOptions",
    "best_response",
    "br_dynamics",
    "cached_copies",
    "cp_cost",
    "cp_revenue",
    "cp_utility",
    "f_pm",
    "feasible_price_range",
    "load_market",
    "market_from_dict",
    "mno_cost",
    "mno_revenue",
    "mno_utility",
    "ne_closed_form",
    "optimal_price",
    "round_uncoded",
    "rt_coefficients",
    "solve_ne_linear",
    "solve_stackelberg",
    "total_capacity",
    "validate_market",
]
