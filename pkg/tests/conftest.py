from fractions import Fraction

import pytest

from services.metric_solver import solve_metric

UNIT = Fraction(1)
OTHER_MASS = Fraction(3, 2)


@pytest.fixture(scope="session")
def metric3():
    return solve_metric(3, UNIT)


@pytest.fixture(scope="session")
def metric5():
    return solve_metric(5, UNIT)


@pytest.fixture(scope="session")
def metric3_other():
    return solve_metric(3, OTHER_MASS)
