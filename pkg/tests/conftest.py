from __future__ import annotations

import numpy as np
import pytest

from tabp.distributions import TabulatedTail


def geometric_grid(lo: float, hi: float, n: int) -> tuple[float, ...]:
    return tuple(float(v) for v in np.geomspace(lo, hi, n))


@pytest.fixture
def pareto_half_table():
    # tail y^-0.5 tabulated out to 1e8; fitted exponent 0.5
    ys = geometric_grid(1.0, 1e8, 65)
    return TabulatedTail(ys=ys, tails=tuple(y**-0.5 for y in ys))


@pytest.fixture
def pareto_one_table():
    ys = geometric_grid(1.0, 1e8, 65)
    return TabulatedTail(ys=ys, tails=tuple(1.0 / y for y in ys))
