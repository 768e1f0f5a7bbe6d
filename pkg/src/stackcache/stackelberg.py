"""One-shot leader/follower game: price first, then the followers' equilibrium."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Optional

from stackcache import follower, leader
from stackcache.errors import InfeasibleMarket, NonConvergence
from stackcache.follower import BrTrace, Schedule
from stackcache.leader import Parity, PriceDecision
from stackcache.model import MarketConfig, QuantityProfile, validate_market

# Relative gap above which the closed form is reported as disagreeing.
CLOSED_FORM_RTOL = 1e-9


@dataclass(frozen=True)
class SolveOptions:
    """Knobs for :func:`solve_stackelberg`.

    ``run_dynamics`` replays best-response dynamics at the optimal price from
    ``initial`` (zeros when None) and requires them to land on the solved
    equilibrium within ``dynamics_check_tol``.
    """

    parity: Parity = "even"
    run_dynamics: bool = True
    initial: Optional[tuple[float, ...]] = None
    tol: float = 1e-9
    max_iter: int = 10_000
    schedule: Schedule = "simultaneous"
    dynamics_check_tol: float = 1e-7
    clamp_to_catalog: bool = False


@dataclass
class EquilibriumReport:
    price: PriceDecision
    quantities: QuantityProfile
    per_cp_utilities: list[float]
    mno_utility: float
    mno_utility_rounded: float
    capacity_used: dict[str, float]
    br_trace: Optional[BrTrace] = None
    diagnostics: list[str] = field(default_factory=list)

    def to_dict(self, include_trace: bool = True) -> dict[str, Any]:
        doc: dict[str, Any] = {
            "price": {
                "price": self.price.price,
                "feasible_range": list(self.price.feasible_range),
                "r": self.price.r,
                "t": self.price.t,
            },
            "quantities": {
                "q": list(self.quantities.q),
                "rounded": None if self.quantities.rounded is None else list(self.quantities.rounded),
            },
            "per_cp_utilities": list(self.per_cp_utilities),
            "mno_utility": self.mno_utility,
            "mno_utility_rounded": _json_float(self.mno_utility_rounded),
            "capacity_used": dict(self.capacity_used),
            "br_trace": None,
            "diagnostics": list(self.diagnostics),
        }
        if self.br_trace is not None:
            doc["br_trace"] = {
                "converged": self.br_trace.converged,
                "final_residual": self.br_trace.final_residual,
                "rounds": self.br_trace.rounds,
                "iterations": [list(p.q) for p in self.br_trace.iterations] if include_trace else None,
            }
        return doc

    def cp_rows(self) -> list[dict[str, Any]]:
        """One flat row per CP, for CSV output."""
        rows = []
        for m, (q, u) in enumerate(zip(self.quantities.q, self.per_cp_utilities)):
            rows.append(
                {
                    "cp": m + 1,
                    "pi_star": self.price.price,
                    "q": q,
                    "q_rounded": self.quantities.rounded[m] if self.quantities.rounded else "",
                    "u_m": u,
                    "u_o": self.mno_utility,
                    "d": self.capacity_used["d"],
                    "S": self.capacity_used["S"],
                }
            )
        return rows


def _json_float(x: float) -> Any:
    # JSON has no infinities.
    return x if math.isfinite(x) else str(x)


def solve_stackelberg(config: MarketConfig, options: Optional[SolveOptions] = None) -> EquilibriumReport:
    """Play the full game on ``config``.

    Steps: optimal price from the leader's closed form, a fresh follower
    equilibrium at that price, optional best-response replay, whole-file
    rounding, utilities, diagnostics.

    Raises:
        MarketValidationError: config fails validation (no partial report).
        InfeasibleMarket: capacity too small for any price below 1.
        NonConvergence: the replayed dynamics failed; the trace is attached.
    """
    opts = options or SolveOptions()
    validate_market(config)
    diagnostics: list[str] = []

    decision = leader.optimal_price(config, parity=opts.parity)
    pi = decision.price
    S = config.capacity

    q = follower.solve_ne_linear(config, pi)
    if q.clamped:
        diagnostics.append("clamped_negative:" + ",".join(str(m + 1) for m in q.clamped))
    gap = follower.closed_form_mismatch(config, pi, CLOSED_FORM_RTOL)
    if gap is not None:
        diagnostics.append(f"closed_form_mismatch:{gap:.3e}")

    if opts.clamp_to_catalog:
        caps = [cp.catalog_size for cp in config.cps]
        over = [m for m, (x, F) in enumerate(zip(q.q, caps)) if x > F]
        if over:
            q = QuantityProfile(tuple(min(x, F) for x, F in zip(q.q, caps)), clamped=q.clamped)
            diagnostics.append("catalog_clamped:" + ",".join(str(m + 1) for m in over))

    trace = None
    if opts.run_dynamics:
        init = QuantityProfile(opts.initial if opts.initial is not None else (0.0,) * config.n_cps)
        trace = follower.br_dynamics(config, pi, init, opts.tol, opts.max_iter, opts.schedule)
        if not trace.converged:
            raise NonConvergence(trace, opts.tol)
        drift = max(abs(a - b) for a, b in zip(trace.final.q, q.q))
        if drift > opts.dynamics_check_tol:
            diagnostics.append(f"dynamics_drift:{drift:.3e}")

    q = follower.round_uncoded(q)
    utilities = [
        follower.cp_utility(pi, x, q.others(m), cp.alpha) for m, (x, cp) in enumerate(zip(q.q, config.cps))
    ]
    if opts.parity == "rounded":
        d = leader.cached_copies(q, config)
    else:
        d = leader.cached_copies(QuantityProfile(q.q), config, opts.parity)
    u_o = leader.mno_utility(pi, config, opts.parity)
    u_o_rounded = leader.mno_utility_at(pi, q, config, opts.parity)
    if not d < S:
        diagnostics.append("infeasible:capacity_exceeded")

    return EquilibriumReport(
        price=decision,
        quantities=q,
        per_cp_utilities=utilities,
        mno_utility=u_o,
        mno_utility_rounded=u_o_rounded,
        capacity_used={"d": d, "S": S},
        br_trace=trace,
        diagnostics=diagnostics,
    )


__all__ = ["EquilibriumReport", "InfeasibleMarket", "SolveOptions", "solve_stackelberg"]
