"""The content providers' sub-game.

Each CP m picks a quantity q_m >= 0 to maximise

    u_m = log(1 + q_m / (1 + J_m / alpha_m)) - price * q_m

where J_m is the total requested by the other CPs. The best response is
``(1/price - 1 - J_m/alpha_m)^+`` and stacking the M interior best responses
gives the linear system ``D q = (1/price - 1) 1`` with ones on the diagonal
of D and 1/alpha_m elsewhere in row m. :func:`solve_ne_linear` solves that
system and is the reference equilibrium; :func:`ne_closed_form` evaluates the
determinant-ratio formulas and is kept for cross-checking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Optional, Sequence

import numpy as np

from stackcache.errors import DomainError, NonConvergence, SingularSystem
from stackcache.model import MarketConfig, QuantityProfile

Schedule = Literal["simultaneous", "sequential"]


def _check_nonneg(**kwargs: float) -> None:
    for name, v in kwargs.items():
        if not v >= 0:
            raise DomainError(f"{name} must be >= 0, got {v}")


def _check_price(price: float) -> None:
    if not 0 < price < 1:
        raise DomainError(f"price must lie in (0, 1), got {price}")


def cp_revenue(q_m: float, J_m: float, alpha: float) -> float:
    """Satisfaction of a CP caching ``q_m`` files while the others cache ``J_m``."""
    _check_nonneg(q_m=q_m, J_m=J_m)
    if not alpha > 0:
        raise DomainError(f"alpha must be > 0, got {alpha}")
    return math.log1p(q_m / (1.0 + J_m / alpha))


def cp_cost(price: float, q_m: float) -> float:
    _check_nonneg(price=price, q_m=q_m)
    return price * q_m


def cp_utility(price: float, q_m: float, J_m: float, alpha: float) -> float:
    return cp_revenue(q_m, J_m, alpha) - cp_cost(price, q_m)


def best_response(price: float, J_m: float, alpha: float) -> float:
    """Utility-maximising quantity of one CP given the others' total ``J_m``."""
    if not price > 0:
        raise DomainError(f"price must be > 0, got {price}")
    _check_nonneg(J_m=J_m)
    if not alpha > 0:
        raise DomainError(f"alpha must be > 0, got {alpha}")
    return max(0.0, 1.0 / price - 1.0 - J_m / alpha)


@dataclass
class BrTrace:
    """Snapshots of best-response dynamics.

    ``iterations[0]`` is the starting profile; each later entry is one round.
    ``residuals[k]`` is the max-norm change that produced ``iterations[k + 1]``.
    """

    iterations: list[QuantityProfile]
    converged: bool
    final_residual: float
    residuals: list[float] = field(default_factory=list)

    @property
    def final(self) -> QuantityProfile:
        return self.iterations[-1]

    @property
    def rounds(self) -> int:
        return len(self.iterations) - 1

    def rows(self) -> list[list[Optional[float]]]:
        """Rows ``[iter, q_1..q_M, residual]``; the initial row has no residual."""
        out = []
        for k, prof in enumerate(self.iterations):
            res = self.residuals[k - 1] if k > 0 else None
            out.append([k, *prof.q, res])
        return out

    def header(self) -> list[str]:
        M = len(self.iterations[0])
        return ["iter", *(f"q_{m + 1}" for m in range(M)), "residual"]


def br_dynamics(
    config: MarketConfig,
    price: float,
    initial: QuantityProfile,
    tol: float = 1e-9,
    max_iter: int = 10_000,
    schedule: Schedule = "simultaneous",
    strict: bool = False,
) -> BrTrace:
    """Iterate best responses from ``initial`` until the max-norm step is <= tol.

    With ``schedule="simultaneous"`` every CP answers the previous round's
    profile (Jacobi). ``"sequential"`` updates CPs in order, each seeing the
    values already updated this round (Gauss-Seidel).

    The trace is returned whether or not the dynamics converged; pass
    ``strict=True`` to get :class:`NonConvergence` (carrying the trace) instead.
    """
    _check_price(price)
    if not tol > 0:
        raise DomainError(f"tol must be > 0, got {tol}")
    if max_iter < 1:
        raise DomainError(f"max_iter must be >= 1, got {max_iter}")
    if len(initial) != config.n_cps:
        raise DomainError(f"initial profile has {len(initial)} entries, market has {config.n_cps} CPs")
    if schedule not in ("simultaneous", "sequential"):
        raise DomainError(f"unknown schedule {schedule!r}")

    alphas = config.alphas
    q = list(initial.q)
    iterations = [QuantityProfile(tuple(q))]
    residuals: list[float] = []
    converged = False
    for _ in range(max_iter):
        if schedule == "simultaneous":
            total = math.fsum(q)
            new = [best_response(price, max(total - q[m], 0.0), alphas[m]) for m in range(len(q))]
        else:
            new = list(q)
            for m in range(len(q)):
                J = math.fsum(new[:m]) + math.fsum(new[m + 1 :])
                new[m] = best_response(price, J, alphas[m])
        step = max(abs(a - b) for a, b in zip(new, q))
        q = new
        iterations.append(QuantityProfile(tuple(q)))
        residuals.append(step)
        if step <= tol:
            converged = True
            break

    trace = BrTrace(iterations, converged, residuals[-1], residuals)
    if strict and not converged:
        raise NonConvergence(trace, tol)
    return trace


def equilibrium_matrix(alphas: Sequence[float]) -> np.ndarray:
    """Row m holds 1 on the diagonal and 1/alpha_m elsewhere."""
    a = np.asarray(alphas, dtype=float)
    D = np.repeat((1.0 / a)[:, None], len(a), axis=1)
    np.fill_diagonal(D, 1.0)
    return D


def solve_ne_linear(config: MarketConfig, price: float) -> QuantityProfile:
    """Nash equilibrium quantities from a direct solve of the stacked best responses.

    Negative components (never produced by a validated market) are clamped to
    zero and reported in ``QuantityProfile.clamped``.
    """
    _check_price(price)
    D = equilibrium_matrix(config.alphas)
    rhs = np.full(config.n_cps, 1.0 / price - 1.0)
    try:
        q = np.linalg.solve(D, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(f"equilibrium system is singular for alphas={config.alphas}") from exc
    if not np.all(np.isfinite(q)):
        raise SingularSystem(f"equilibrium system is ill-conditioned for alphas={config.alphas}")
    clamped = tuple(int(m) for m in np.flatnonzero(q < 0))
    q = np.where(q < 0, 0.0, q)
    return QuantityProfile(tuple(q.tolist()), clamped=clamped)


def closed_form_terms(alphas: Sequence[float]) -> tuple[list[float], list[float], float]:
    """The (a_m, b_m, D) terms of the determinant-ratio equilibrium formula, 1-based indices.

    Empty sums are 0 and empty products 1, so M = 2 gives a_m = 1 - 1/alpha_m
    and b_m = 1.
    """
    al = [float(a) for a in alphas]
    M = len(al)
    if any(a == 1 for a in al):
        raise DomainError("closed form is undefined when some alpha equals 1")
    # al[k - 1] is alpha_k in 1-based notation.
    a1, aM = al[0], al[M - 1]

    a_terms, b_terms = [], []
    for m in range(1, M + 1):
        am = al[m - 1]
        if m != 1:
            s = sum((am - al[l - 1]) / ((al[l - 1] - 1) * am) for l in range(2, M + 1) if l != m)
            a_terms.append(1 - 1 / am - (1 - a1) / a1 * s)
            b_terms.append(math.prod(1 - 1 / al[l - 1] for l in range(2, M + 1) if l != m))
        else:
            s = sum((a1 - al[l - 1]) / ((al[l - 1] - 1) * a1) for l in range(2, M))
            a_terms.append(1 - 1 / a1 - (1 - aM) / aM * s)
            b_terms.append(math.prod(1 - 1 / al[l - 1] for l in range(2, M)))
    D = (1 - (1 - a1) / a1 * sum(1 / (al[l - 1] - 1) for l in range(2, M + 1))) * math.prod(
        1 - 1 / al[l - 1] for l in range(2, M + 1)
    )
    return a_terms, b_terms, D


def ne_closed_form(config: MarketConfig, price: float) -> QuantityProfile:
    """Nash equilibrium from the a_m b_m / D determinant-ratio formula.

    A single CP has no interaction terms and gets ``1/price - 1`` directly.
    No clamping or correction is applied; compare against
    :func:`solve_ne_linear` to detect disagreement.
    """
    _check_price(price)
    scale = 1.0 / price - 1.0
    if config.n_cps == 1:
        if config.cps[0].alpha == 1:
            raise DomainError("closed form is undefined when some alpha equals 1")
        return QuantityProfile((scale,))
    a_terms, b_terms, D = closed_form_terms(config.alphas)
    return QuantityProfile(tuple(scale * a * b / D for a, b in zip(a_terms, b_terms)))


def _round_half_away(x: float) -> int:
    return int(math.copysign(math.floor(abs(x) + 0.5), x))


def round_uncoded(q: QuantityProfile) -> QuantityProfile:
    """Attach whole-file quantities (ties go away from zero); continuous values are kept."""
    return QuantityProfile(q.q, rounded=tuple(_round_half_away(x) for x in q.q), clamped=q.clamped)


def closed_form_mismatch(config: MarketConfig, price: float, rel_tol: float = 1e-9) -> Optional[float]:
    """Largest relative gap between the two equilibrium routes, or None if within ``rel_tol``."""
    lin = np.asarray(solve_ne_linear(config, price).q)
    cf = np.asarray(ne_closed_form(config, price).q)
    gap = float(np.max(np.abs(lin - cf) / np.maximum(np.abs(lin), 1e-300)))
    return gap if not gap <= rel_tol else None
