from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate as sp_integrate

from tabp.distributions import (
    MAX_FINITE,
    Constant,
    DistributionError,
    Exponential,
    GrainDistribution,
    Pareto,
    TabulatedTail,
    invert_tail,
    parse_distribution,
)

FAMILIES = [
    Constant(c=2.0),
    Exponential(mean_length=1.5),
    Pareto(alpha=0.5),
    Pareto(alpha=1.0),
    Pareto(alpha=1.7),
]
# the constant law is an atom, so tail inversion only holds off the jump
CONTINUOUS = FAMILIES[1:]


# -- tails and quantiles ------------------------------------------------------

@pytest.mark.parametrize("dist", FAMILIES, ids=lambda d: d.spec_string())
def test_tail_is_a_survival_function(dist):
    ts = np.geomspace(1e-3, 1e3, 40)
    vals = [dist.tail(float(t)) for t in ts]
    assert all(0.0 <= v <= 1.0 for v in vals)
    assert all(a >= b for a, b in zip(vals, vals[1:]))
    assert dist.tail(0.0) == 1.0


@pytest.mark.parametrize("dist", CONTINUOUS, ids=lambda d: d.spec_string())
def test_quantile_inverts_tail(dist):
    for u in np.geomspace(1e-6, 1.0, 25):
        y = dist.quantile_of_tail(float(u))
        assert dist.tail(y) == pytest.approx(u, rel=1e-9, abs=1e-12)


def test_constant_quantile_is_the_atom():
    d = Constant(c=2.0)
    for u in [1e-9, 0.3, 1.0]:
        assert d.quantile_of_tail(u) == 2.0


def test_quantile_at_zero_is_infinite_for_unbounded_support():
    assert Exponential(mean_length=1.0).quantile_of_tail(0.0) == math.inf
    assert Pareto(alpha=0.5).quantile_of_tail(0.0) == math.inf
    # bounded support stays at the endpoint
    assert Constant(c=3.0).quantile_of_tail(0.0) == 3.0


def test_pareto_quantile_fast_paths_match_generic():
    # alpha 1 and 0.5 take dedicated branches; compare against the pow form
    for u in np.geomspace(1e-9, 1.0, 30):
        assert Pareto(alpha=1.0).quantile_of_tail(float(u)) == pytest.approx(
            float(u) ** -1.0, rel=1e-14
        )
        assert Pareto(alpha=0.5).quantile_of_tail(float(u)) == pytest.approx(
            float(u) ** -2.0, rel=1e-14
        )


# -- truncated mean -----------------------------------------------------------

@pytest.mark.parametrize("dist", FAMILIES, ids=lambda d: d.spec_string())
def test_truncated_mean_integrates_the_tail(dist):
    # E[min(t, rho)] = int_0^t P(rho > s) ds; scipy is the oracle
    for t in [0.3, 1.0, 2.5, 17.0]:
        want, err = sp_integrate.quad(dist.tail, 0.0, t, points=[1.0], limit=200)
        assert dist.truncated_mean(t) == pytest.approx(want, rel=1e-9, abs=1e-12)


def test_truncated_mean_closed_forms():
    assert Pareto(alpha=1.0).truncated_mean(math.e) == pytest.approx(2.0, rel=1e-15)
    assert Pareto(alpha=0.5).truncated_mean(4.0) == pytest.approx(2.0 * 2.0 - 1.0, rel=1e-15)
    assert Constant(c=2.0).truncated_mean(5.0) == 2.0
    assert Constant(c=2.0).truncated_mean(1.0) == 1.0
    assert Exponential(mean_length=2.0).truncated_mean(3.0) == pytest.approx(
        2.0 * -math.expm1(-1.5), rel=1e-14
    )


def test_truncated_mean_monotone_and_capped_by_mean():
    for dist in FAMILIES:
        m = dist.mean()
        ts = np.linspace(0.0, 50.0, 60)
        vals = [dist.truncated_mean(float(t)) for t in ts]
        assert all(b >= a for a, b in zip(vals, vals[1:]))
        if math.isfinite(m):
            assert vals[-1] <= m + 1e-12


def test_means():
    assert Constant(c=2.0).mean() == 2.0
    assert Exponential(mean_length=1.5).mean() == 1.5
    assert Pareto(alpha=2.0).mean() == pytest.approx(2.0)
    assert Pareto(alpha=1.5).mean() == pytest.approx(3.0)
    assert Pareto(alpha=1.0).mean() == math.inf
    assert Pareto(alpha=0.5).mean() == math.inf


# -- sampling ----------------------------------------------------------------

def test_constant_samples_are_the_atom():
    xs = Constant(c=2.0).sample_many(np.random.default_rng(0), 100)
    assert (xs == 2.0).all()


@pytest.mark.parametrize("dist", CONTINUOUS, ids=lambda d: d.spec_string())
def test_sampling_matches_tail(dist):
    rng = np.random.default_rng(7)
    xs = dist.sample_many(rng, 4000)
    assert xs.shape == (4000,)
    # empirical tail at a few quantile points, 5 sigma binomial slack
    for q in [0.2, 0.5, 0.8]:
        y = dist.quantile_of_tail(q)
        if not math.isfinite(y):
            continue
        phat = float(np.mean(xs > y))
        se = math.sqrt(q * (1 - q) / len(xs))
        assert abs(phat - q) < 5 * se + 1e-9


def test_sampling_is_reproducible():
    d = Pareto(alpha=0.5)
    a = d.sample_many(np.random.default_rng(3), 10)
    b = d.sample_many(np.random.default_rng(3), 10)
    assert (a == b).all()
    assert d.sample(np.random.default_rng(3)) == a[0]


def test_extreme_quantiles_overflow_to_inf_and_samples_clamp():
    # alpha this small pushes u**(-1/alpha) past the float range
    d = Pareto(alpha=0.01)
    assert d.quantile_of_tail(1e-30) == math.inf
    assert Pareto(alpha=0.5).quantile_of_tail(1e-200) == math.inf
    # drawn grain lengths stay finite: overflow clamps to the float max
    xs = Pareto(alpha=0.001).sample_many(np.random.default_rng(5), 2000)
    assert np.isfinite(xs).all()
    assert xs.max() == MAX_FINITE


# -- tabulated tails ----------------------------------------------------------

def test_tabulated_matches_source_on_grid(pareto_half_table):
    src = Pareto(alpha=0.5)
    for y in pareto_half_table.ys:
        assert pareto_half_table.tail(y) == pytest.approx(src.tail(y), rel=1e-12)
    # interpolation error between knots stays small on a dense-enough grid
    for y in np.geomspace(1.5, 1e7, 50):
        assert pareto_half_table.tail(float(y)) == pytest.approx(src.tail(float(y)), rel=0.02)


def test_tabulated_fitted_exponent(pareto_half_table, pareto_one_table):
    assert pareto_half_table.fitted_exponent == pytest.approx(0.5, rel=1e-9)
    # rounding noise around the critical exponent snaps to exactly 1
    assert pareto_one_table.fitted_exponent == 1.0


def test_tabulated_bounded_support_mean():
    t = TabulatedTail(ys=(1.0, 2.0, 3.0), tails=(0.5, 0.25, 0.0))
    assert t.fitted_exponent == math.inf
    # piecewise-linear tail: int_0^3 tail = 1*... via trapezoid on [0,1],[1,2],[2,3]
    want = (1.0 + 0.5) / 2 + (0.5 + 0.25) / 2 + (0.25 + 0.0) / 2
    assert t.mean() == pytest.approx(want, rel=1e-12)
    assert t.truncated_mean(10.0) == pytest.approx(want, rel=1e-12)


def test_tabulated_extrapolated_mean(pareto_half_table, pareto_one_table):
    assert pareto_half_table.mean() == math.inf
    assert pareto_one_table.mean() == math.inf
    ys = tuple(np.geomspace(1.0, 1e6, 40))
    t = TabulatedTail.from_distribution(Pareto(alpha=2.0), ys)
    # beyond the grid the fitted power law integrates to s_N y_N / (beta-1);
    # inside it the trapezoid rule overshoots a convex tail slightly
    assert t.mean() == pytest.approx(Pareto(alpha=2.0).mean(), rel=0.05)
    assert t.mean() >= Pareto(alpha=2.0).mean()


def test_tabulated_validation_errors():
    with pytest.raises(DistributionError):
        TabulatedTail(ys=(1.0,), tails=(0.5,))
    with pytest.raises(DistributionError):
        TabulatedTail(ys=(2.0, 1.0), tails=(0.5, 0.25))
    with pytest.raises(DistributionError):
        TabulatedTail(ys=(1.0, 2.0), tails=(0.25, 0.5))
    with pytest.raises(DistributionError):
        TabulatedTail(ys=(1.0, 2.0), tails=(0.5, 1.5))
    with pytest.raises(DistributionError):
        # flat tail at the end leaves the extrapolation exponent undefined
        TabulatedTail(ys=(1.0, 2.0, 3.0), tails=(0.5, 0.25, 0.25))


def test_tabulated_csv_roundtrip(tmp_path, pareto_half_table):
    path = tmp_path / "tail.csv"
    with open(path, "w") as fh:
        fh.write("y,tail\n")
        for y, s in zip(pareto_half_table.ys, pareto_half_table.tails):
            fh.write(f"{y!r},{s!r}\n")
    loaded = TabulatedTail.from_csv(str(path))
    assert loaded.ys == pareto_half_table.ys
    assert loaded.tails == pareto_half_table.tails
    assert loaded.spec_string() == f"table:path={path}"


def test_tabulated_csv_errors(tmp_path):
    bad_header = tmp_path / "h.csv"
    bad_header.write_text("a,b\n1,0.5\n")
    with pytest.raises(DistributionError):
        TabulatedTail.from_csv(str(bad_header))
    bad_row = tmp_path / "r.csv"
    bad_row.write_text("y,tail\n1,zebra\n")
    with pytest.raises(DistributionError):
        TabulatedTail.from_csv(str(bad_row))


@given(st.floats(min_value=1e-12, max_value=1.0))
@settings(max_examples=200, deadline=None)
def test_invert_tail_inverts(u):
    ys = tuple(float(v) for v in np.geomspace(1.0, 1e6, 30))
    t = TabulatedTail.from_distribution(Pareto(alpha=0.7), ys)
    y = t.quantile_of_tail(u)
    assert y > 0
    if math.isfinite(y):
        assert t.tail(y) == pytest.approx(u, rel=1e-9, abs=1e-12)


def test_invert_tail_module_function_agrees(pareto_half_table):
    ys = np.asarray(pareto_half_table.ys)
    ss = np.asarray(pareto_half_table.tails)
    beta = pareto_half_table.fitted_exponent
    for u in [1.0, 0.999, 0.5, 0.01, 1e-7, 0.0]:
        assert invert_tail(u, ys, ss, beta) == pareto_half_table.quantile_of_tail(u)
    assert invert_tail(0.0, ys, ss, beta) == math.inf


# -- parsing -----------------------------------------------------------------

@pytest.mark.parametrize(
    "spec",
    ["constant:c=2", "exponential:mean=1.5", "pareto:alpha=0.5", "pareto:alpha=1.7"],
)
def test_parse_roundtrip(spec):
    dist = parse_distribution(spec)
    assert isinstance(dist, GrainDistribution)
    assert parse_distribution(dist.spec_string()).spec_string() == dist.spec_string()


def test_parse_inline_table_roundtrip():
    d = parse_distribution("table:inline=1,0.5;2,0.25;4,0.125")
    assert isinstance(d, TabulatedTail)
    assert d.ys == (1.0, 2.0, 4.0)
    d2 = parse_distribution(d.spec_string())
    assert d2.ys == d.ys and d2.tails == d.tails


def test_parse_table_path(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("y,tail\n1,0.5\n2,0.25\n")
    d = parse_distribution(f"table:path={path}")
    assert d.tails == (0.5, 0.25)


@pytest.mark.parametrize(
    "spec,needle",
    [
        ("weibull:k=2", "weibull"),
        ("pareto:alpha=oops", "oops"),
        ("pareto", "alpha"),
        ("constant:c=2:junk", "junk"),
        ("table:inline=1;2", "inline"),
        ("table", "path"),
    ],
)
def test_parse_errors_name_the_offender(spec, needle):
    with pytest.raises(DistributionError) as exc:
        parse_distribution(spec)
    assert needle in str(exc.value)


@pytest.mark.parametrize(
    "bad",
    [lambda: Constant(c=0.0), lambda: Constant(c=-1.0),
     lambda: Exponential(mean_length=0.0), lambda: Pareto(alpha=0.0),
     lambda: Pareto(alpha=-0.5)],
)
def test_parameter_validation(bad):
    with pytest.raises((DistributionError, ValueError)):
        bad()
