"""Closed-form expectations for the coverage process.

Germs fall as a Poisson process of intensity lam; each germ u carries a
grain [u, u + rho] with rho drawn from the grain law.  On the half-line the
process starts at 0, so a point t > 0 is vacant iff no germ u <= t has a
grain reaching past t, which gives

    P(t vacant) = exp(-lam * E[min(t, rho)]).

Everything else here integrates that identity:

* expected vacant length in [0, T] integrates it over t,
* the expected number of complete vacant gaps in [0, T] is lam times the
  expected vacant length (each gap is opened by exactly one germ whose
  grain end is exposed, which is a Poisson mark identity),
* the total gap count, when a.s. finite, is geometric with success
  probability 1 / (lam * integral over [0, inf)).

On the full line the process is stationary and a point is vacant with
probability exp(-lam * E[rho]), zero when the mean grain diverges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .distributions import GrainDistribution
from .quadrature import IntegralResult, integrate, integrate_with_certificate


@dataclass(frozen=True)
class ClosedForms:
    """Exact expectations for intensity lam and a given grain law."""

    lam: float
    dist: GrainDistribution

    def __post_init__(self):
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise ValueError(f"intensity must be positive and finite, got {self.lam}")

    # -- pointwise --------------------------------------------------------

    def vacancy_probability(self, t: float) -> float:
        """P(t is vacant) on the half-line, t >= 0."""
        return math.exp(-self.lam * self.dist.truncated_mean(t))

    def covered_volume_fraction(self) -> float:
        """Stationary covered fraction, 1 - exp(-lam * E[rho])."""
        m = self.dist.mean()
        if math.isinf(m):
            return 1.0
        return -math.expm1(-self.lam * m)

    def stationary_vacancy(self) -> float:
        """P(point vacant) on the full line; 0 when E[rho] diverges."""
        m = self.dist.mean()
        return 0.0 if math.isinf(m) else math.exp(-self.lam * m)

    # -- integrated -------------------------------------------------------

    def _integrand(self, t: float) -> float:
        return math.exp(-self.lam * self.dist.truncated_mean(t))

    def vacant_length_result(self) -> IntegralResult:
        """Expected total vacant length on [0, inf) with certified error."""
        return integrate_with_certificate(
            self._integrand,
            self.dist.vacancy_tail_certificate(self.lam),
            knots=self.dist.integrand_knots(),
        )

    def expected_vacant_length(self, T: float | None = None) -> float:
        """E[vacant length in [0, T]] on the half-line; T=None means the
        whole half-line (inf in the regimes where vacancy has infinite
        mass)."""
        if T is None:
            return self.vacant_length_result().value
        if T < 0:
            raise ValueError(f"window length must be >= 0, got {T}")
        if T == 0:
            return 0.0
        return integrate(self._integrand, 0.0, T, knots=self.dist.integrand_knots())

    def expected_num_vacant(self, T: float | None = None) -> float:
        """E[# complete vacant gaps in [0, T]] on the half-line."""
        return self.lam * self.expected_vacant_length(T)

    def nv_geometric_parameter(self) -> float:
        """Success parameter of the geometric law of the total gap count.

        The count is a.s. finite exactly when the vacancy integral
        converges; then it is geometric on {1, 2, ...} with mean
        lam * integral.  Returns 0.0 when the count is a.s. infinite.
        """
        total = self.expected_num_vacant(None)
        if math.isinf(total):
            return 0.0
        return min(1.0, 1.0 / total)

    def mean_covered_fraction(self, T: float, burn_in: float = 0.0) -> float:
        """E[covered fraction of [burn_in, T]] on the half-line."""
        if not (0 <= burn_in < T):
            raise ValueError(f"need 0 <= burn_in < T, got burn_in={burn_in}, T={T}")
        vac = self.expected_vacant_length(T) - self.expected_vacant_length(burn_in)
        return 1.0 - vac / (T - burn_in)
