import ast
import inspect
import math
from fractions import Fraction

import pytest

from stackcache import oracle
from stackcache.oracle import (
    cramer_solve,
    exact_ne,
    golden_section_max,
    grid_argmax_price,
    grid_price_bounds,
    numeric_best_response,
    verify_ne,
)
from tests.conftest import make_market


def test_golden_section_interior_and_boundary():
    assert golden_section_max(lambda x: -(x - 1.3) ** 2, 0, 4, tol=1e-10) == pytest.approx(1.3, abs=1e-7)
    assert golden_section_max(lambda x: -x, 0, 4) == 0
    assert golden_section_max(lambda x: x, 0, 4) == 4


@pytest.mark.parametrize(
    "args, expected",
    [((0.3, 0, 5, 10), 7 / 3), ((1.0, 0, 5, 10), 0.0), ((0.3, 35 / 17, 5, 10), 98 / 51)],
)
def test_numeric_best_response(args, expected):
    assert numeric_best_response(*args) == pytest.approx(expected, abs=1e-8)


def test_cramer_small_system():
    assert cramer_solve([[2, 1], [1, 3]], [3, 5]) == [Fraction(4, 5), Fraction(7, 5)]
    with pytest.raises(ZeroDivisionError):
        cramer_solve([[1, 2], [2, 4]], [1, 1])


def test_exact_ne_values():
    assert exact_ne([5, 7], Fraction(3, 10)) == [Fraction(98, 51), Fraction(35, 17)]
    assert exact_ne([4, 5, 6], Fraction(1, 5)) == [Fraction(268, 107), Fraction(308, 107), Fraction(332, 107)]
    assert exact_ne([3], Fraction(1, 2)) == [Fraction(1)]


def test_grid_argmax_single_cp():
    config = make_market([2.0], capacity=10, p_mean=1.0, delta_p=0.0)
    pi = grid_argmax_price(config, 100_000)
    lower, upper = grid_price_bounds(config)
    assert lower == pytest.approx(1 / 11)
    assert abs(pi - 2 / 11) <= (upper - lower) / 99_999
    assert lower < pi < upper


def test_grid_needs_enough_points(two_cp):
    with pytest.raises(ValueError):
        grid_argmax_price(two_cp, 50)


class TestVerifyNe:
    def test_equilibrium_passes(self, two_cp):
        verdict = verify_ne(two_cp, 0.3, [98 / 51, 35 / 17], [0.1, -0.1, 0.01, -0.01])
        assert verdict.passed and verdict.witness is None
        assert verdict.worst_violation <= 1e-12

    @pytest.mark.parametrize("m", [0, 1])
    def test_doubled_component_is_caught(self, two_cp, m):
        q = [98 / 51, 35 / 17]
        q[m] *= 2
        verdict = verify_ne(two_cp, 0.3, q)
        assert not verdict.passed
        assert verdict.worst_violation > 0
        assert verdict.witness.startswith(f"CP {m + 1}:")

    def test_single_cp(self):
        config = make_market([3.0])
        assert verify_ne(config, 0.25, [3.0]).passed


def test_oracle_does_not_import_the_formulas_it_checks():
    tree = ast.parse(inspect.getsource(oracle))
    imported = set()
    for node in ast.walk(tree):
        if isinstance(node, ast.ImportFrom) and node.module:
            imported.add(node.module)
        elif isinstance(node, ast.Import):
            imported.update(a.name for a in node.names)
    assert not imported & {"stackcache.follower", "stackcache.leader", "stackcache.stackelberg"}
