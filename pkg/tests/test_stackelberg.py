import json

import numpy as np
import pytest

from stackcache import (
    InfeasibleMarket,
    MarketValidationError,
    NonConvergence,
    SolveOptions,
    best_response,
    follower,
    mno_utility,
    solve_ne_linear,
    solve_stackelberg,
)
from stackcache.model import CpParams, MarketConfig, SbsFleet
from stackcache.oracle import verify_ne
from tests.conftest import make_market, random_market


def test_two_cp_report(two_cp):
    report = solve_stackelberg(two_cp)
    pi = report.price.price
    assert pi == pytest.approx(0.028714, abs=1e-6)
    scale = 1 / pi - 1
    assert report.quantities.q == pytest.approx((scale * 28 / 34, scale * 30 / 34), rel=1e-13)
    assert report.quantities.rounded == (28, 30)
    assert report.br_trace.converged
    assert max(abs(a - b) for a, b in zip(report.br_trace.final.q, report.quantities.q)) <= 1e-7
    assert len(report.per_cp_utilities) == 2
    assert report.capacity_used["d"] < report.capacity_used["S"] == 100
    assert report.diagnostics == []


def test_single_cp_report():
    config = make_market([2.0], capacity=10, p_mean=1.3, delta_p=0.4)
    report = solve_stackelberg(config)
    f = 1.5
    assert report.price.r == pytest.approx(f, rel=1e-14)
    assert report.price.t == pytest.approx(1.0, rel=1e-14)
    assert report.price.price == pytest.approx((np.sqrt(f) + f) / (10 + f), rel=1e-14)
    assert report.quantities.q == pytest.approx((1 / report.price.price - 1,), rel=1e-14)


def test_invalid_config_gives_no_report():
    config = MarketConfig(SbsFleet((10,)), (CpParams(1.5), CpParams(1.5), CpParams(4)))
    with pytest.raises(MarketValidationError):
        solve_stackelberg(config)


def test_infeasible_market():
    with pytest.raises(InfeasibleMarket):
        solve_stackelberg(make_market([5, 7], capacity=1.0, p_mean=4.0, delta_p=0.0))


def test_non_convergence_carries_trace(two_cp):
    with pytest.raises(NonConvergence) as err:
        solve_stackelberg(two_cp, SolveOptions(tol=1e-15, max_iter=2))
    assert err.value.trace.rounds == 2


def test_closed_form_mismatch_is_reported(two_cp, monkeypatch):
    real = follower.ne_closed_form

    def skewed(config, price):
        q = real(config, price)
        return type(q)(tuple(x * 1.01 for x in q.q))

    monkeypatch.setattr(follower, "ne_closed_form", skewed)
    report = solve_stackelberg(two_cp)
    assert any(d.startswith("closed_form_mismatch") for d in report.diagnostics)


def test_catalog_clamp_is_flagged():
    config = MarketConfig(SbsFleet((100,)), (CpParams(5, 1.0, 0.2, 10), CpParams(7, 1.0, 0.2, 1000)))
    report = solve_stackelberg(config, SolveOptions(clamp_to_catalog=True, run_dynamics=False))
    assert report.quantities.q[0] == 10
    assert "catalog_clamped:1" in report.diagnostics


@pytest.mark.parametrize("seed", range(15))
def test_end_to_end_consistency(seed):
    rng = np.random.default_rng(seed)
    config = random_market(rng, 1 + seed % 5)
    report = solve_stackelberg(config)
    pi = report.price.price
    q = report.quantities
    assert max(abs(a - b) for a, b in zip(report.br_trace.final.q, q.q)) <= 1e-7
    u_star = mno_utility(pi, config)
    for factor in (0.99, 1.01):
        assert mno_utility(pi * factor, config) <= u_star
    assert verify_ne(config, pi, q).passed
    for m, cp in enumerate(config.cps):
        assert best_response(pi, q.others(m), cp.alpha) == pytest.approx(q.q[m], abs=1e-9)


def test_report_serialises(two_cp):
    report = solve_stackelberg(two_cp)
    doc = json.loads(json.dumps(report.to_dict()))
    assert set(doc) == {
        "price",
        "quantities",
        "per_cp_utilities",
        "mno_utility",
        "mno_utility_rounded",
        "capacity_used",
        "br_trace",
        "diagnostics",
    }
    assert doc["price"]["feasible_range"][1] == 1.0
    rows = report.cp_rows()
    assert [r["cp"] for r in rows] == [1, 2]
