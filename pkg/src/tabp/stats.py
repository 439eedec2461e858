"""Goodness-of-fit machinery for the simulation checks.

Self-contained implementations (Kolmogorov-Smirnov with the small-sample
scale correction, chi-square tail via the regularized incomplete gamma)
so the package's own test verdicts carry no runtime dependency beyond
numpy; the scientific stack versions serve as independent oracles in the
test suite instead of as the implementation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


# -- regularized incomplete gamma ----------------------------------------

def _lower_gamma_series(a: float, x: float) -> float:
    """P(a, x) by series, for x < a + 1."""
    ap = a
    term = 1.0 / a
    total = term
    for _ in range(1000):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * 1e-16:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _upper_gamma_cf(a: float, x: float) -> float:
    """Q(a, x) by continued fraction (modified Lentz), for x >= a + 1."""
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 1000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delt = d * c
        h *= delt
        if abs(delt - 1.0) < 1e-16:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def reg_gamma_upper(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x)."""
    if a <= 0 or x < 0:
        raise ValueError(f"need a > 0 and x >= 0, got a={a}, x={x}")
    if x == 0.0:
        return 1.0
    if x < a + 1.0:
        return 1.0 - _lower_gamma_series(a, x)
    return _upper_gamma_cf(a, x)


def chi2_sf(stat: float, df: float) -> float:
    """Survival function of the chi-square law with df degrees of freedom."""
    return reg_gamma_upper(0.5 * df, 0.5 * stat)


# -- Kolmogorov-Smirnov ----------------------------------------------------

def kolmogorov_sf(y: float) -> float:
    """P(K > y) for the Kolmogorov law.

    Alternating series for large y, Jacobi-transformed series for small y
    where the alternating form converges slowly.
    """
    if y <= 0.0:
        return 1.0
    if y < 1.18:
        # theta-function form of the CDF
        q = math.exp(-math.pi * math.pi / (8.0 * y * y))
        cdf = (math.sqrt(2.0 * math.pi) / y) * (q + q**9 + q**25 + q**49)
        return 1.0 - cdf
    total = 0.0
    for k in range(1, 200):
        term = math.exp(-2.0 * k * k * y * y)
        total += -term if k % 2 == 0 else term
        if term < 1e-18:
            break
    return max(0.0, 2.0 * total)


@dataclass(frozen=True)
class KsResult:
    n: int
    statistic: float
    pvalue: float


def ks_test(sample, cdf) -> KsResult:
    """Two-sided one-sample KS test of sample against the given CDF.

    The p-value uses the asymptotic Kolmogorov law on the scale-corrected
    statistic (sqrt(n) + 0.12 + 0.11/sqrt(n)) * D, good to plotting
    accuracy for n >= 5 or so.
    """
    x = np.sort(np.asarray(sample, dtype=np.float64))
    n = len(x)
    if n == 0:
        raise ValueError("empty sample")
    f = np.array([cdf(v) for v in x])
    i = np.arange(1, n + 1)
    d_plus = float(np.max(i / n - f))
    d_minus = float(np.max(f - (i - 1) / n))
    d = max(d_plus, d_minus)
    rt = math.sqrt(n)
    p = kolmogorov_sf((rt + 0.12 + 0.11 / rt) * d)
    return KsResult(n=n, statistic=d, pvalue=p)


def exponential_cdf(rate: float):
    """CDF of the exponential law with the given rate."""
    if rate <= 0:
        raise ValueError(f"rate must be positive, got {rate}")

    def cdf(x):
        return -math.expm1(-rate * x) if x > 0 else 0.0

    return cdf


# -- chi-square goodness of fit --------------------------------------------

@dataclass(frozen=True)
class Chi2Result:
    statistic: float
    df: int
    pvalue: float
    expected: tuple[float, ...]
    min_expected: float


def chisquare_test(observed, probs) -> Chi2Result:
    """Pearson chi-square of observed bin counts against given cell
    probabilities (no parameters estimated, df = cells - 1)."""
    obs = np.asarray(observed, dtype=np.float64)
    p = np.asarray(probs, dtype=np.float64)
    if obs.shape != p.shape or obs.ndim != 1 or len(obs) < 2:
        raise ValueError("observed and probs must be 1-d of equal length >= 2")
    if abs(p.sum() - 1.0) > 1e-9:
        raise ValueError(f"cell probabilities sum to {p.sum()}, not 1")
    n = obs.sum()
    expected = n * p
    stat = float(np.sum((obs - expected) ** 2 / expected))
    df = len(obs) - 1
    return Chi2Result(
        statistic=stat,
        df=df,
        pvalue=chi2_sf(stat, df),
        expected=tuple(float(e) for e in expected),
        min_expected=float(expected.min()),
    )


def geometric_bin_probs(p: float, n_bins: int) -> np.ndarray:
    """Cell probabilities {1}, {2}, ..., {n_bins-1}, {>= n_bins} for a
    geometric count on {1, 2, ...} with success probability p."""
    if not (0 < p <= 1):
        raise ValueError(f"geometric parameter must be in (0, 1], got {p}")
    if n_bins < 2:
        raise ValueError("need at least two bins")
    q = 1.0 - p
    cells = [p * q ** (k - 1) for k in range(1, n_bins)]
    cells.append(q ** (n_bins - 1))
    return np.asarray(cells)


def bin_counts(values, n_bins: int) -> np.ndarray:
    """Histogram integer values into cells {1}, ..., {n_bins-1}, {>= n_bins}."""
    v = np.asarray(values)
    counts = [int(np.sum(v == k)) for k in range(1, n_bins)]
    counts.append(int(np.sum(v >= n_bins)))
    return np.asarray(counts, dtype=np.int64)
