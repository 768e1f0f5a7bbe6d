from pathlib import Path

import numpy as np
import pytest

from stackcache import CpParams, MarketConfig, SbsFleet

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def make_market(alphas, capacity=100.0, p_mean=1.0, delta_p=0.2):
    n = len(alphas)
    p = p_mean if np.ndim(p_mean) else [p_mean] * n
    dp = delta_p if np.ndim(delta_p) else [delta_p] * n
    return MarketConfig(
        SbsFleet((capacity,)),
        tuple(CpParams(float(a), float(pm), float(d), 1000) for a, pm, d in zip(alphas, p, dp)),
    )


def random_market(rng: np.random.Generator, M: int) -> MarketConfig:
    """Valid market: alpha_m in [max(M, 2), M + 45], copies in [0.5, 3], S in [20, 200]."""
    alphas = rng.uniform(max(M, 2), M + 45, M)
    return make_market(
        alphas,
        capacity=float(rng.uniform(20, 200)),
        p_mean=rng.uniform(0.5, 3.0, M),
        delta_p=rng.uniform(0.0, 0.5, M),
    )


@pytest.fixture
def two_cp():
    """Alphas 5 and 7, p = 1, delta_p = 0.2, S = 100 split over four SBSs."""
    return MarketConfig(
        SbsFleet((25, 25, 25, 25)),
        (CpParams(5, 1.0, 0.2, 1000), CpParams(7, 1.0, 0.2, 1000)),
    )


@pytest.fixture
def config_dir():
    return CONFIG_DIR


def pytest_terminal_summary(terminalreporter):
    try:
        from tests.test_acceptance import RESULTS
    except ImportError:
        try:
            from test_acceptance import RESULTS
        except ImportError:
            return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
