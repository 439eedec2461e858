"""Regime classification.

Three long-run behaviours, decided by the mean grain length and the
vacancy integral I = integral over [0, inf) of exp(-lam*E[min(t, rho)]) dt:

* PARTIAL_COVERAGE ("I"): E[rho] finite.  Covered fraction
  1-exp(-lam*E[rho]) strictly below one; occupied and vacant components
  both recur forever and all stay bounded.
* UNBOUNDED_COMPONENT ("II"): I finite (forces E[rho] infinite).  The
  total vacancy has finite mass, so beyond the last of finitely many gaps
  a single occupied component stretches to infinity.
* FULL_FRAGMENTED ("III"): E[rho] infinite but I infinite too.  Covered
  fraction tends to one, yet gaps never stop appearing, so no occupied
  component is unbounded.

An unbounded occupied component exists exactly when I is finite.

The closed-form families are decided analytically through their tail
certificates.  Tabulated tails get an asymptotic growth test of
lam*E[min(t, rho)] against ln t, which may return an inconclusive verdict
near the critical boundary; trust_extrapolation=True instead treats the
fitted power-law extrapolation as exact and always returns a definite
answer, flagged as heuristic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .analytics import ClosedForms
from .distributions import GrainDistribution, TabulatedTail

GROWTH_HORIZON = 1e12
GROWTH_DELTA = 0.05
_RTOL = 1e-9


class Regime(Enum):
    PARTIAL_COVERAGE = "I"
    UNBOUNDED_COMPONENT = "II"
    FULL_FRAGMENTED = "III"


class Method(Enum):
    ANALYTIC = "analytic"
    TAIL_ASYMPTOTIC = "tail_asymptotic"
    HEURISTIC = "heuristic"


@dataclass
class RegimeVerdict:
    """Outcome of classify(); regime None means inconclusive."""

    regime: Regime | None
    method: Method
    lam: float
    mean_grain: float
    vacancy_integral: float | None
    covered_fraction_limit: float | None
    unbounded_component: bool | None
    notes: list[str] = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def conclusive(self) -> bool:
        return self.regime is not None

    def regime_label(self) -> str:
        return self.regime.value if self.regime is not None else "inconclusive"


def _analytic(lam: float, dist: GrainDistribution, method: Method) -> RegimeVerdict:
    m = dist.mean()
    cert = dist.vacancy_tail_certificate(lam)
    if math.isfinite(m):
        return RegimeVerdict(
            regime=Regime.PARTIAL_COVERAGE,
            method=method,
            lam=lam,
            mean_grain=m,
            vacancy_integral=math.inf,
            covered_fraction_limit=-math.expm1(-lam * m),
            unbounded_component=False,
            details={"certificate": repr(cert)},
        )
    res = ClosedForms(lam, dist).vacant_length_result()
    if res.is_finite:
        return RegimeVerdict(
            regime=Regime.UNBOUNDED_COMPONENT,
            method=method,
            lam=lam,
            mean_grain=math.inf,
            vacancy_integral=res.value,
            covered_fraction_limit=1.0,
            unbounded_component=True,
            details={
                "certificate": repr(cert),
                "integral_cutoff": res.cutoff,
                "integral_tail_bound": res.tail_bound,
            },
        )
    return RegimeVerdict(
        regime=Regime.FULL_FRAGMENTED,
        method=method,
        lam=lam,
        mean_grain=math.inf,
        vacancy_integral=math.inf,
        covered_fraction_limit=1.0,
        unbounded_component=False,
        details={"certificate": repr(cert)},
    )


def _growth_judgments(lam: float, dist: GrainDistribution, horizon: float, delta: float):
    """Asymptotic judgments sampled from lam*E[min(t, rho)] near the horizon.

    Returns (integral_verdict, mean_verdict, diagnostics); each verdict is
    'finite', 'infinite', or 'inconclusive'.
    """
    # integral side: does f(t) = lam*E[min(t,rho)] outgrow (1+delta)*ln t
    # (integrand eventually below t**-(1+delta): integral converges) or
    # stay under (1-delta)*ln t (integrand above t**-(1-delta): diverges)?
    probe_ts = np.geomspace(horizon / 10.0, horizon, 6)
    f = np.array([lam * dist.truncated_mean(t) for t in probe_ts])
    log_ts = np.log(probe_ts)
    g_plus = f - (1.0 + delta) * log_ts
    g_minus = f - (1.0 - delta) * log_ts
    scale = max(1.0, float(np.max(np.abs(f))))
    plus_increasing = bool(np.all(np.diff(g_plus) > _RTOL * scale))
    minus_nonincreasing = bool(g_minus[-1] <= g_minus[0] + _RTOL * scale)
    if plus_increasing:
        integral = "finite"
    elif minus_nonincreasing:
        integral = "infinite"
    else:
        integral = "inconclusive"

    # mean side: decade increments of the truncated mean near the horizon.
    # Saturated or geometrically decaying increments mean a finite total;
    # non-decaying increments mean divergence.
    edges = horizon * 10.0 ** np.arange(-5.0, 1.0)
    means = np.array([dist.truncated_mean(t) for t in edges])
    inc = np.diff(means)
    m_hor = float(means[-1])
    mean_scale = max(1.0, m_hor)
    ratios = [inc[i + 1] / inc[i] if inc[i] > 0 else 0.0 for i in range(len(inc) - 1)]
    if inc[-1] <= 1e-9 * mean_scale:
        mean_verdict = "finite"
    elif all(r <= 0.95 for r in ratios):
        mean_verdict = "finite"
    elif all(r >= 0.999 for r in ratios):
        mean_verdict = "infinite"
    else:
        mean_verdict = "inconclusive"
    diagnostics = {
        "mean_increment_ratios": [float(r) for r in ratios],
        "horizon": horizon,
        "delta": delta,
        "g_plus": g_plus.tolist(),
        "g_minus_first_last": [float(g_minus[0]), float(g_minus[-1])],
        "mean_at_horizon": m_hor,
        "mean_decade_increments": inc.tolist(),
    }
    return integral, mean_verdict, diagnostics


def _tail_asymptotic(
    lam: float, dist: GrainDistribution, horizon: float, delta: float
) -> RegimeVerdict:
    integral, mean_verdict, diag = _growth_judgments(lam, dist, horizon, delta)
    notes = []
    if isinstance(dist, TabulatedTail):
        notes.append(
            "growth sampled beyond the tabulated grid uses the fitted power-law extrapolation"
        )
    regime = None
    vac_integral = None
    cvf = None
    unbounded = None
    if integral == "finite":
        regime = Regime.UNBOUNDED_COMPONENT
        cvf = 1.0
        unbounded = True
    elif mean_verdict == "finite":
        regime = Regime.PARTIAL_COVERAGE
        vac_integral = math.inf
        cvf = -math.expm1(-lam * diag["mean_at_horizon"])
        unbounded = False
    elif integral == "infinite" and mean_verdict == "infinite":
        regime = Regime.FULL_FRAGMENTED
        vac_integral = math.inf
        cvf = 1.0
        unbounded = False
    else:
        notes.append(
            f"growth of the vacancy exponent is too close to ln t at horizon {horizon:g} "
            "to separate the regimes"
        )
    return RegimeVerdict(
        regime=regime,
        method=Method.TAIL_ASYMPTOTIC,
        lam=lam,
        mean_grain=diag["mean_at_horizon"] if mean_verdict == "finite" else math.inf,
        vacancy_integral=vac_integral,
        covered_fraction_limit=cvf,
        unbounded_component=unbounded,
        notes=notes,
        details=diag,
    )


def classify(
    lam: float,
    dist: GrainDistribution,
    method: str = "auto",
    trust_extrapolation: bool = False,
    horizon: float = GROWTH_HORIZON,
    delta: float = GROWTH_DELTA,
) -> RegimeVerdict:
    """Classify (lam, dist) into one of the three regimes.

    method: 'auto' picks the analytic route for closed-form families and
    the asymptotic growth test for tabulated tails; 'analytic' and
    'tail_asymptotic' force a route.  Forcing 'analytic' on a tabulated
    tail requires trust_extrapolation=True and yields a heuristic verdict.
    """
    if not (lam > 0 and math.isfinite(lam)):
        raise ValueError(f"intensity must be positive and finite, got {lam}")
    if method not in ("auto", "analytic", "tail_asymptotic"):
        raise ValueError(f"unknown classification method {method!r}")
    tabulated = isinstance(dist, TabulatedTail)
    if method == "tail_asymptotic":
        verdict = _tail_asymptotic(lam, dist, horizon, delta)
        if tabulated and trust_extrapolation and verdict.regime is None:
            forced = _analytic(lam, dist, Method.HEURISTIC)
            forced.notes.append("inconclusive growth test overridden by trusted extrapolation")
            return forced
        return verdict
    if tabulated:
        if trust_extrapolation:
            verdict = _analytic(lam, dist, Method.HEURISTIC)
            verdict.notes.append("treats the fitted power-law tail extrapolation as exact")
            return verdict
        if method == "analytic":
            raise ValueError(
                "analytic classification of a tabulated tail needs trust_extrapolation=True"
            )
        return _tail_asymptotic(lam, dist, horizon, delta)
    return _analytic(lam, dist, Method.ANALYTIC)


def unbounded_component_exists(lam: float, dist: GrainDistribution, **kwargs) -> bool | None:
    """Whether an unbounded occupied component exists; None if undecided."""
    return classify(lam, dist, **kwargs).unbounded_component
