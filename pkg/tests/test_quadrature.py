from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import integrate as sp_integrate

from tabp.quadrature import (
    CUTOFF_CAP,
    IntegralResult,
    PositiveFloor,
    PowerTail,
    StretchedExpTail,
    integrate,
    integrate_with_certificate,
)


# -- proper integrals against scipy ------------------------------------------

@pytest.mark.parametrize(
    "f,a,b,knots",
    [
        (math.sin, 0.0, math.pi, ()),
        (lambda t: math.exp(-t), 0.0, 30.0, ()),
        (lambda t: 1.0 / (1.0 + t * t), 0.0, 100.0, ()),
        (lambda t: math.exp(-min(t, 1.0)), 0.0, 10.0, [1.0]),
        (lambda t: abs(t - 2.0) ** 1.5, 0.0, 5.0, [2.0]),
    ],
)
def test_integrate_matches_scipy(f, a, b, knots):
    want, _ = sp_integrate.quad(f, a, b, points=list(knots) or None, limit=300)
    got = integrate(f, a, b, knots=knots, abs_tol=1e-11, rel_tol=1e-10)
    assert got == pytest.approx(want, rel=1e-8, abs=1e-10)


def test_integrate_long_range_decaying():
    # geometric segmenting has to handle 10 decades without losing the head
    f = lambda t: math.exp(-1.0) / t if t > 1.0 else math.exp(-t)
    got = integrate(f, 0.0, 1e10, knots=[1.0])
    want = (1.0 - math.exp(-1.0)) + math.exp(-1.0) * math.log(1e10)
    assert got == pytest.approx(want, rel=1e-7)


def test_integrate_zero_width():
    assert integrate(math.sin, 2.0, 2.0) == 0.0


# -- power tails --------------------------------------------------------------

def test_power_tail_remainder_closed_form():
    # int_X^inf c t^-p dt = c X^(1-p) / (p-1)
    cert = PowerTail(coef=2.0, exponent=3.0, t0=1.0)
    assert cert.is_integrable
    assert cert.remainder_bound(10.0) == pytest.approx(2.0 * 10.0**-2.0 / 2.0, rel=1e-12)


def test_power_tail_divergent():
    assert not PowerTail(coef=1.0, exponent=1.0, t0=1.0).is_integrable
    assert not PowerTail(coef=1.0, exponent=0.5, t0=1.0).is_integrable
    assert PowerTail(coef=1.0, exponent=1.0 + 1e-12, t0=1.0).is_integrable


def test_exact_power_tail_keeps_cutoff_small():
    # an exact remainder needs no cutoff growth even near the critical
    # exponent, where an envelope bound would need astronomical cutoffs
    cert = PowerTail(coef=1.0, exponent=1.0 + 1e-7, t0=1.0, exact=True)
    cut = cert.suggest_cutoff(1e-9)
    assert cut <= max(cert.t0, 1.0)
    assert cert.exact_remainder(cut) == pytest.approx(cert.remainder_bound(cut), rel=1e-12)


def test_inexact_power_tail_cutoff_is_capped():
    cert = PowerTail(coef=1.0, exponent=1.0 + 1e-7, t0=1.0)
    cut = cert.suggest_cutoff(1e-9)
    assert cut <= CUTOFF_CAP
    assert cert.exact_remainder(cut) is None


# -- stretched-exponential tails ----------------------------------------------

def test_stretched_tail_bound_dominates_truth():
    # integrand exp(-2 sqrt(t)): log_coef=0, rate=2, power=0.5
    cert = StretchedExpTail(log_coef=0.0, rate=2.0, power=0.5, t0=1.0)
    assert cert.is_integrable
    for X in [10.0, 100.0, 1e4]:
        truth, _ = sp_integrate.quad(lambda t: math.exp(-2.0 * math.sqrt(t)), X, np.inf)
        bound = cert.remainder_bound(X)
        assert truth <= bound
        assert bound <= truth * 3.0  # not wildly loose either


def test_stretched_tail_cutoff_achieves_tolerance():
    cert = StretchedExpTail(log_coef=0.0, rate=2.0, power=0.5, t0=1.0)
    cut = cert.suggest_cutoff(1e-10)
    assert cert.remainder_bound(cut) <= 1e-10


def test_stretched_tail_log_space_handles_huge_coefficients():
    # log_coef of +500 would overflow a linear-space coefficient
    cert = StretchedExpTail(log_coef=500.0, rate=1.0, power=1.0, t0=1.0)
    cut = cert.suggest_cutoff(1e-8)
    assert math.isfinite(cut)
    assert cert.remainder_bound(cut) <= 1e-8


def test_positive_floor_never_integrable():
    cert = PositiveFloor(level=0.25, t0=3.0)
    assert not cert.is_integrable
    assert cert.remainder_bound(10.0) == math.inf


# -- certified improper integrals ----------------------------------------------

def test_certified_integral_exact_tail():
    # int_0^inf e^{-2} t^{-2} beyond 1, e^{-2t} before: the grain-coverage
    # vacancy integrand of the unit-scale heavy tail at rate 2
    f = lambda t: math.exp(-2.0 * min(1.0 + math.log(t) if t > 1 else t, 1e300))

    def g(t):
        return math.exp(-2.0) * t**-2.0 if t > 1.0 else math.exp(-2.0 * t)

    cert = PowerTail(coef=math.exp(-2.0), exponent=2.0, t0=1.0, exact=True)
    res = integrate_with_certificate(g, cert, knots=[1.0])
    want = (1.0 - math.exp(-2.0)) / 2.0 + math.exp(-2.0)
    assert isinstance(res, IntegralResult)
    assert res.is_finite
    assert res.tail_bound == 0.0
    assert res.value == pytest.approx(want, rel=1e-9)


def test_certified_integral_divergent():
    res = integrate_with_certificate(
        lambda t: 1.0 / (1.0 + t), PositiveFloor(level=0.1, t0=0.0)
    )
    assert not res.is_finite
    assert res.value == math.inf


def test_certified_integral_honest_residual():
    # a cutoff capped below the tolerance target must report the leftover
    cert = PowerTail(coef=1.0, exponent=1.0 + 1e-9, t0=1.0)
    res = integrate_with_certificate(
        lambda t: 1.0 if t <= 1.0 else t ** -(1.0 + 1e-9), cert
    )
    assert res.is_finite
    assert res.cutoff <= CUTOFF_CAP
    assert res.tail_bound > 0.0
