"""Realization sampling and the replicate stream protocol.

Germ positions are the partial sums of Exp(lam) spacings, each germ
carrying one uniform mark that the inverse-tail transform turns into its
grain length.  Every replicate gets its own PCG64 stream keyed by
(master_seed, replicate indices), which makes runs reproducible
independently of worker count or backend.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .distributions import GrainDistribution

FULL_LINE_INFINITE_MEAN = (
    "full-line window not simulable: infinite mean grain length covers the entire line almost surely"
)

LINES = ("half", "full")

# refuse derived germ buffers beyond this many entries (~800 MB of
# positions plus lengths); an explicit capacity argument overrides
GERM_BUDGET = 50_000_000


class InfeasibleError(ValueError):
    """The requested run cannot be carried out at any cost (for example a
    full-line window with an infinite-mean grain law)."""


@dataclass(frozen=True)
class ModelParams:
    """Intensity, grain law, and which line the germs fall on."""

    lam: float
    dist: GrainDistribution
    line: str = "half"

    def __post_init__(self):
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise ValueError(f"intensity must be positive and finite, got {self.lam}")
        if self.line not in LINES:
            raise ValueError(f"line must be one of {LINES}, got {self.line!r}")


@dataclass
class Realization:
    """Germs of one sampled window, sorted by position.

    ``start`` is where germ generation began (negative for full-line
    runs); the observation window is always [0, T].
    """

    lam: float
    line: str
    T: float
    start: float
    germs: np.ndarray
    rhos: np.ndarray
    n_clamped: int

    def __len__(self):
        return len(self.germs)

    def to_csv(self, path: str) -> None:
        with open(path, "w") as fh:
            fh.write("u,rho\n")
            for u, r in zip(self.germs, self.rhos):
                fh.write(f"{float(u)!r},{float(r)!r}\n")


def make_stream(master_seed: int, *indices: int) -> np.random.Generator:
    """The stream for one replicate: PCG64 keyed by the full index path."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((master_seed, *indices))))


def germ_capacity(lam: float, start: float, end: float) -> int:
    """Initial buffer size: Poisson mean plus six sigmas of headroom."""
    mu = lam * max(end - start, 0.0)
    return int(mu + 6.0 * math.sqrt(mu) + 64.0)


def left_buffer_length(lam: float, dist: GrainDistribution, eps: float = 1e-4, max_buffer: float = 1e9) -> float:
    """How far left of the window full-line germs must start.

    Picks L so the expected number of grains from germs below -L that
    still reach the window is at most eps, i.e.
    lam * (E[rho] - E[min(L, rho)]) <= eps.
    """
    if eps <= 0:
        raise ValueError(f"buffer eps must be positive, got {eps}")
    m = dist.mean()
    if math.isinf(m):
        raise InfeasibleError(FULL_LINE_INFINITE_MEAN)

    def excess(L):
        return lam * (m - dist.truncated_mean(L)) - eps

    if excess(0.0) <= 0.0:
        return 0.0
    lo, hi = 0.0, 1.0
    while excess(hi) > 0.0:
        lo, hi = hi, hi * 2.0
        if hi > max_buffer:
            raise InfeasibleError(
                f"left buffer exceeds {max_buffer:g}: the grain tail decays too "
                "slowly for a full-line window at eps={:g}; increase eps".format(eps)
            )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-9 * max(1.0, hi):
            break
    return hi


def _sample(lam, dist, start, T, rng, capacity):
    fam, p0, p1, ty, ts = _kernels.params_for(dist)
    if capacity is None:
        cap = germ_capacity(lam, start, T)
        # a slowly decaying grain tail can demand a stationarity buffer
        # whose germ count would dwarf memory; fail before allocating
        if cap > GERM_BUDGET:
            raise InfeasibleError(
                f"sampling [{start:g}, {T:g}] at intensity {lam:g} needs about "
                f"{cap:,} germs (budget {GERM_BUDGET:,}); shrink the window, "
                "allow a larger eps, or pass an explicit capacity to override"
            )
    else:
        cap = capacity
    while True:
        state = rng.bit_generator.state
        u_out = np.empty(cap, dtype=np.float64)
        r_out = np.empty(cap, dtype=np.float64)
        n, n_clamped = _kernels.sample_germs(rng, lam, start, T, fam, p0, p1, ty, ts, u_out, r_out)
        if n <= cap:
            return u_out[:n].copy(), r_out[:n].copy(), n_clamped
        # buffer overflow: rewind the stream and rerun with the exact count
        rng.bit_generator.state = state
        cap = n


def sample_halfline(
    lam: float,
    dist: GrainDistribution,
    T: float,
    rng: np.random.Generator,
    capacity: int | None = None,
) -> Realization:
    """Sample the germs hitting [0, T] for a process started at 0."""
    if not (T > 0 and math.isfinite(T)):
        raise ValueError(f"window length must be positive and finite, got {T}")
    germs, rhos, n_clamped = _sample(lam, dist, 0.0, T, rng, capacity)
    return Realization(lam=lam, line="half", T=T, start=0.0, germs=germs, rhos=rhos, n_clamped=n_clamped)


def sample_fullline(
    lam: float,
    dist: GrainDistribution,
    T: float,
    rng: np.random.Generator,
    eps: float = 1e-4,
    capacity: int | None = None,
) -> Realization:
    """Sample a stationary window [0, T] of the full-line process.

    Requires a finite mean grain; germs are generated from -L where L is
    left_buffer_length(lam, dist, eps), so boundary truncation changes
    window statistics by at most eps in expectation.
    """
    if not (T > 0 and math.isfinite(T)):
        raise ValueError(f"window length must be positive and finite, got {T}")
    L = left_buffer_length(lam, dist, eps)
    germs, rhos, n_clamped = _sample(lam, dist, -L, T, rng, capacity)
    return Realization(lam=lam, line="full", T=T, start=-L, germs=germs, rhos=rhos, n_clamped=n_clamped)


def sample_window(params: ModelParams, T, rng, eps: float = 1e-4, capacity: int | None = None) -> Realization:
    if params.line == "half":
        return sample_halfline(params.lam, params.dist, T, rng, capacity)
    return sample_fullline(params.lam, params.dist, T, rng, eps, capacity)
