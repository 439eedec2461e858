"""Grain-length distributions.

Every grain law used by the simulator and the closed-form layer lives here.
A distribution must expose four quantities:

* ``tail(y)``            -- P(rho > y)
* ``truncated_mean(t)``  -- E[min(t, rho)] = integral of the tail over [0, t]
* ``mean()``             -- E[rho], ``math.inf`` when the mean diverges
* ``quantile_of_tail(u)``-- the inverse-tail transform used for sampling:
                            for U uniform on (0, 1), quantile_of_tail(U) is
                            distributed like rho.

Sampling of unbounded laws happens in double precision; a draw whose
inverse transform overflows is clamped to the largest finite double.  The
simulation kernels count those events (see the ``n_clamped`` diagnostics).
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .quadrature import PositiveFloor, PowerTail, StretchedExpTail, TailCertificate

MAX_FINITE = sys.float_info.max


class DistributionError(ValueError):
    """Invalid distribution parameters or an unparseable spec string."""


def clamp_finite(x: float) -> float:
    """Map an overflowed draw onto the largest representable double."""
    return x if x <= MAX_FINITE else MAX_FINITE


def invert_tail(u: float, ys, ss, beta: float) -> float:
    """Inverse of a tabulated tail at u, shared with the simulation
    kernels so the pure and compiled paths round identically.

    ``ys``/``ss`` are the knots, ``beta`` the extrapolation exponent.
    """
    n = len(ys)
    if u >= ss[0]:
        # head segment, linear from (0, 1) down to (ys[0], ss[0])
        if ss[0] >= 1.0:
            return ys[0]
        return ys[0] * (1.0 - u) / (1.0 - ss[0])
    if u < ss[n - 1]:
        # below every tabulated value: power-law extrapolation
        if u <= 0.0:
            return math.inf
        try:
            return ys[n - 1] * (u / ss[n - 1]) ** (-1.0 / beta)
        except OverflowError:
            # C pow would return inf here; match it
            return math.inf
    # tabulated segment: ss[0] > u >= ss[-1]; bisect keeping
    # ss[lo] > u and ss[hi] <= u
    lo, hi = 0, n - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ss[mid] > u:
            lo = mid
        else:
            hi = mid
    return ys[lo] + (ss[lo] - u) * (ys[lo + 1] - ys[lo]) / (ss[lo] - ss[lo + 1])


class GrainDistribution:
    """Base class for grain-length laws. Subclasses are immutable."""

    def tail(self, y: float) -> float:
        raise NotImplementedError

    def quantile_of_tail(self, u: float) -> float:
        """Inverse of the tail: the y with tail(y) = u, for u in (0, 1)."""
        raise NotImplementedError

    def truncated_mean(self, t: float) -> float:
        raise NotImplementedError

    def mean(self) -> float:
        raise NotImplementedError

    def spec_string(self) -> str:
        raise NotImplementedError

    def integrand_knots(self) -> list[float]:
        """Points where the tail (hence the vacancy integrand) has kinks."""
        return []

    def vacancy_tail_certificate(self, lam: float) -> TailCertificate:
        """Analytic bound on exp(-lam * truncated_mean(t)) for large t.

        Drives truncation of improper integrals; a ``PositiveFloor``
        certificate marks the integrand as bounded away from zero, i.e.
        the integral over [0, inf) diverges.
        """
        raise NotImplementedError

    # -- sampling ---------------------------------------------------------

    def sample(self, rng: np.random.Generator) -> float:
        """Draw one grain length; clamps overflow to the largest double."""
        return clamp_finite(self.quantile_of_tail(rng.random()))

    def sample_many(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Vectorized draws, for statistical checks at scale."""
        with np.errstate(divide="ignore", over="ignore"):
            out = self._quantile_vec(rng.random(n))
        np.minimum(out, MAX_FINITE, out=out)
        return out

    def _quantile_vec(self, u: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _validate_t(self, t: float) -> None:
        if t < 0:
            raise DistributionError(f"truncated_mean requires t >= 0, got {t}")


@dataclass(frozen=True)
class Constant(GrainDistribution):
    """Degenerate law: every grain has length c."""

    c: float

    def __post_init__(self):
        if not (self.c > 0 and math.isfinite(self.c)):
            raise DistributionError(f"constant grain length must be positive, got {self.c}")

    def tail(self, y):
        return 1.0 if y < self.c else 0.0

    def quantile_of_tail(self, u):
        return self.c

    def truncated_mean(self, t):
        self._validate_t(t)
        return min(t, self.c)

    def mean(self):
        return self.c

    def spec_string(self):
        return f"constant:c={self.c:g}"

    def integrand_knots(self):
        return [self.c]

    def vacancy_tail_certificate(self, lam):
        return PositiveFloor(level=math.exp(-lam * self.c), t0=self.c)

    def _quantile_vec(self, u):
        return np.full_like(u, self.c)


@dataclass(frozen=True)
class Exponential(GrainDistribution):
    """Exponential grain lengths with the given mean."""

    mean_length: float

    def __post_init__(self):
        if not (self.mean_length > 0 and math.isfinite(self.mean_length)):
            raise DistributionError(f"exponential mean must be positive, got {self.mean_length}")

    def tail(self, y):
        return math.exp(-y / self.mean_length) if y > 0 else 1.0

    def quantile_of_tail(self, u):
        if u <= 0.0:
            return math.inf
        return -self.mean_length * math.log(u)

    def truncated_mean(self, t):
        self._validate_t(t)
        m = self.mean_length
        return m * -math.expm1(-t / m)

    def mean(self):
        return self.mean_length

    def spec_string(self):
        return f"exponential:mean={self.mean_length:g}"

    def vacancy_tail_certificate(self, lam):
        return PositiveFloor(level=math.exp(-lam * self.mean_length), t0=0.0)

    def _quantile_vec(self, u):
        return -self.mean_length * np.log(u)


@dataclass(frozen=True)
class Pareto(GrainDistribution):
    """Power-law tail P(rho > y) = y**(-alpha) for y >= 1 (scale fixed at 1).

    The mean is alpha/(alpha-1) for alpha > 1 and diverges for alpha <= 1.
    """

    alpha: float

    def __post_init__(self):
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise DistributionError(f"pareto alpha must be positive, got {self.alpha}")

    def tail(self, y):
        return 1.0 if y < 1.0 else y ** (-self.alpha)

    def quantile_of_tail(self, u):
        # branch structure shared with the simulation kernels: the two
        # common exponents take explicit fast paths so every backend
        # rounds identically; overflow means inf, as in C arithmetic
        if u <= 0.0:
            return math.inf
        try:
            if self.alpha == 1.0:
                return 1.0 / u
            if self.alpha == 0.5:
                d = u * u
                return 1.0 / d if d > 0.0 else math.inf
            return u ** (-1.0 / self.alpha)
        except OverflowError:
            return math.inf

    def truncated_mean(self, t):
        self._validate_t(t)
        a = self.alpha
        if t <= 1.0:
            return t
        if a == 1.0:
            return 1.0 + math.log(t)
        return (t ** (1.0 - a) - a) / (1.0 - a)

    def mean(self):
        a = self.alpha
        return a / (a - 1.0) if a > 1.0 else math.inf

    def spec_string(self):
        return f"pareto:alpha={self.alpha:g}"

    def integrand_knots(self):
        return [1.0]

    def vacancy_tail_certificate(self, lam):
        a = self.alpha
        if a > 1.0:
            return PositiveFloor(level=math.exp(-lam * self.mean()), t0=1.0)
        if a == 1.0:
            # exp(-lam (1 + ln t)) = exp(-lam) * t**(-lam), exactly, for t >= 1
            return PowerTail(coef=math.exp(-lam), exponent=lam, t0=1.0, exact=True)
        # exp(-lam ((t**(1-a) - a)/(1-a))) = C exp(-r t**g), exactly, for t >= 1
        g = 1.0 - a
        return StretchedExpTail(
            log_coef=lam * a / (1.0 - a), rate=lam / (1.0 - a), power=g, t0=1.0
        )

    def _quantile_vec(self, u):
        return np.power(u, -1.0 / self.alpha)


@dataclass(frozen=True)
class TabulatedTail(GrainDistribution):
    """Grain law given by tabulated tail values.

    ``ys`` strictly increasing positive ordinates, ``tails`` the matching
    non-increasing values of P(rho > y).  Between knots the tail is linear.
    Left of the first knot it is linear from (0, 1); right of the last knot
    it follows the power law fitted to the final two knots (unless the last
    tail value is 0, in which case the support is bounded).  The fitted
    exponent also decides whether the mean is finite.
    """

    ys: tuple[float, ...]
    tails: tuple[float, ...]
    source: str = ""

    def __post_init__(self):
        ys = np.asarray(self.ys, dtype=float)
        ss = np.asarray(self.tails, dtype=float)
        if ys.ndim != 1 or ys.shape != ss.shape or len(ys) < 2:
            raise DistributionError("tabulated tail needs at least two (y, tail) pairs")
        if not np.all(np.isfinite(ys)) or not np.all(np.isfinite(ss)):
            raise DistributionError("tabulated tail values must be finite")
        if ys[0] <= 0 or np.any(np.diff(ys) <= 0):
            raise DistributionError("tabulated y grid must be positive and strictly increasing")
        if np.any(ss < 0) or np.any(ss > 1) or np.any(np.diff(ss) > 0):
            raise DistributionError("tabulated tail values must be non-increasing within [0, 1]")
        if ss[-1] > 0 and ss[-2] <= ss[-1]:
            raise DistributionError(
                "tabulated tail must strictly decrease on its final segment "
                "(or end at 0) so the extrapolation exponent is defined"
            )
        object.__setattr__(self, "ys", tuple(float(v) for v in ys))
        object.__setattr__(self, "tails", tuple(float(v) for v in ss))
        if ss[-1] == 0.0:
            beta = math.inf
        else:
            beta = math.log(ss[-2] / ss[-1]) / math.log(ys[-1] / ys[-2])
            # a fit within rounding noise of the critical exponent is the
            # critical exponent; keeps the closed forms off the degenerate
            # near-1 branches
            if abs(beta - 1.0) <= 1e-9:
                beta = 1.0
        object.__setattr__(self, "_beta", beta)

    @property
    def fitted_exponent(self) -> float:
        """Power-law exponent of the extrapolated tail; inf when bounded."""
        return self._beta

    def tail(self, y):
        ys, ss = self.ys, self.tails
        if y <= 0.0:
            return 1.0
        if y <= ys[0]:
            return 1.0 - (1.0 - ss[0]) * y / ys[0]
        if y >= ys[-1]:
            if ss[-1] == 0.0:
                return 0.0
            return ss[-1] * (y / ys[-1]) ** (-self.fitted_exponent)
        i = int(np.searchsorted(np.asarray(ys), y, side="right")) - 1
        w = (y - ys[i]) / (ys[i + 1] - ys[i])
        return ss[i] + w * (ss[i + 1] - ss[i])

    def quantile_of_tail(self, u):
        return invert_tail(u, self.ys, self.tails, self.fitted_exponent)

    def truncated_mean(self, t):
        # The tail is piecewise linear up to the last knot and an exact
        # power law beyond it, so the integral of the tail is closed-form.
        self._validate_t(t)
        ys, ss = self.ys, self.tails
        if t == 0.0:
            return 0.0
        total = 0.0
        # head segment: linear from (0, 1) to (ys[0], ss[0])
        a, b = 0.0, ys[0]
        sa, sb = 1.0, ss[0]
        for i in range(len(ys)):
            if t <= b:
                st = sa + (sb - sa) * (t - a) / (b - a)
                return total + 0.5 * (sa + st) * (t - a)
            total += 0.5 * (sa + sb) * (b - a)
            if i == len(ys) - 1:
                break
            a, b, sa, sb = ys[i], ys[i + 1], ss[i], ss[i + 1]
        # beyond the grid: power-law tail ss[-1] * (y / ys[-1])**(-beta)
        if ss[-1] == 0.0 or t <= ys[-1]:
            return total
        beta = self.fitted_exponent
        yN, sN = ys[-1], ss[-1]
        if beta == 1.0:
            return total + sN * yN * math.log(t / yN)
        return total + sN * yN * ((t / yN) ** (1.0 - beta) - 1.0) / (1.0 - beta)

    def mean(self):
        if self.tails[-1] == 0.0:
            return self.truncated_mean(self.ys[-1])
        beta = self.fitted_exponent
        if beta <= 1.0:
            return math.inf
        grid_part = self.truncated_mean(self.ys[-1])
        return grid_part + self.tails[-1] * self.ys[-1] / (beta - 1.0)

    def spec_string(self):
        if self.source:
            return f"table:path={self.source}"
        pairs = ";".join(f"{y:g},{s:g}" for y, s in zip(self.ys, self.tails))
        return f"table:inline={pairs}"

    def integrand_knots(self):
        return list(self.ys)

    def vacancy_tail_certificate(self, lam):
        m = self.mean()
        if math.isfinite(m):
            return PositiveFloor(level=math.exp(-lam * m), t0=self.ys[-1])
        beta = self.fitted_exponent
        yN, sN = self.ys[-1], self.tails[-1]
        mN = self.truncated_mean(yN)
        if beta == 1.0:
            # beyond the grid the truncated mean is mN + sN*yN*ln(t/yN), so
            # the integrand is exactly exp(-lam*mN) * (t/yN)**(-lam*sN*yN)
            coef = math.exp(-lam * mN) * yN ** (lam * sN * yN)
            return PowerTail(coef=coef, exponent=lam * sN * yN, t0=yN, exact=True)
        # beta < 1: truncated mean grows like a stretched power of t
        g = 1.0 - beta
        r = lam * sN * yN**beta / g
        return StretchedExpTail(log_coef=-lam * (mN - sN * yN / g), rate=r, power=g, t0=yN)

    def _quantile_vec(self, u):
        return np.array([self.quantile_of_tail(float(v)) for v in u])

    @classmethod
    def from_csv(cls, path: str) -> "TabulatedTail":
        """Load a `y,tail` CSV (header required)."""
        import csv as _csv

        ys: list[float] = []
        ss: list[float] = []
        with open(path, newline="") as fh:
            reader = _csv.reader(fh)
            header = next(reader, None)
            if header is None or [h.strip().lower() for h in header[:2]] != ["y", "tail"]:
                raise DistributionError(f"{path}: expected CSV header 'y,tail'")
            for row in reader:
                if not row or not row[0].strip():
                    continue
                try:
                    ys.append(float(row[0]))
                    ss.append(float(row[1]))
                except (IndexError, ValueError) as exc:
                    raise DistributionError(f"{path}: bad row {row!r}") from exc
        return cls(ys=tuple(ys), tails=tuple(ss), source=path)

    @classmethod
    def from_distribution(
        cls, dist: GrainDistribution, ys: Sequence[float]
    ) -> "TabulatedTail":
        """Tabulate another law's tail on a grid (testing aid)."""
        return cls(ys=tuple(ys), tails=tuple(dist.tail(y) for y in ys))


# -- spec-string parsing --------------------------------------------------

_FAMILIES = ("constant", "exponential", "pareto", "table")


def parse_distribution(spec: str) -> GrainDistribution:
    """Parse a `name(:key=value)*` distribution spec.

    Grammar: ``constant:c=2``, ``exponential:mean=1``, ``pareto:alpha=1``,
    ``table:path=tail.csv``.
    """
    parts = spec.strip().split(":")
    name = parts[0].strip().lower()
    if name not in _FAMILIES:
        raise DistributionError(f"unknown distribution {name!r} in spec {spec!r}")
    kv: dict[str, str] = {}
    for token in parts[1:]:
        if "=" not in token:
            raise DistributionError(f"malformed token {token!r} in spec {spec!r}")
        key, _, value = token.partition("=")
        kv[key.strip().lower()] = value.strip()

    def fnum(key: str) -> float:
        if key not in kv:
            raise DistributionError(f"spec {spec!r} is missing {key!r}")
        try:
            return float(kv[key])
        except ValueError:
            raise DistributionError(f"bad value for {key!r} in spec {spec!r}: {kv[key]!r}")

    if name == "constant":
        return Constant(c=fnum("c"))
    if name == "exponential":
        return Exponential(mean_length=fnum("mean"))
    if name == "pareto":
        return Pareto(alpha=fnum("alpha"))
    if "path" in kv:
        return TabulatedTail.from_csv(kv["path"])
    if "inline" in kv:
        pairs = [p for p in kv["inline"].split(";") if p]
        try:
            ys, ss = zip(*((float(a), float(b)) for a, b in (p.split(",") for p in pairs)))
        except ValueError as exc:
            raise DistributionError(f"bad inline table in spec {spec!r}") from exc
        return TabulatedTail(ys=ys, tails=ss)
    raise DistributionError(f"table spec {spec!r} needs path=<file> or inline=<pairs>")
