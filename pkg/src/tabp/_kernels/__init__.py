"""Simulation kernel backends.

Two interchangeable implementations of the sweep: a Cython extension
(_speedups) and a pure-Python mirror (pure).  The compiled one is
preferred when importable; TABP_KERNEL=python forces the fallback and
TABP_KERNEL=compiled makes a missing extension a hard error.  Both
consume the random stream identically, so a given seed yields bit-equal
results on either.
"""

from __future__ import annotations

import os

import numpy as np

from ..distributions import Constant, Exponential, GrainDistribution, Pareto, TabulatedTail

FAMILY_CONSTANT = 0
FAMILY_EXPONENTIAL = 1
FAMILY_PARETO = 2
FAMILY_TABLE = 3

_EMPTY = np.empty(0, dtype=np.float64)


def params_for(dist: GrainDistribution):
    """Marshal a grain law into the flat (family, p0, p1, tab_y, tab_s)
    form both kernels take."""
    if isinstance(dist, Constant):
        return FAMILY_CONSTANT, dist.c, 0.0, _EMPTY, _EMPTY
    if isinstance(dist, Exponential):
        return FAMILY_EXPONENTIAL, dist.mean_length, 0.0, _EMPTY, _EMPTY
    if isinstance(dist, Pareto):
        return FAMILY_PARETO, dist.alpha, -1.0 / dist.alpha, _EMPTY, _EMPTY
    if isinstance(dist, TabulatedTail):
        ys = np.ascontiguousarray(dist.ys, dtype=np.float64)
        ss = np.ascontiguousarray(dist.tails, dtype=np.float64)
        return FAMILY_TABLE, 0.0, dist.fitted_exponent, ys, ss
    raise TypeError(f"no kernel marshalling for {type(dist).__name__}")


_requested = os.environ.get("TABP_KERNEL", "").strip().lower()
if _requested in ("", "compiled"):
    try:
        from . import _speedups as _impl

        BACKEND = "compiled"
    except ImportError:
        if _requested:
            raise
        from . import pure as _impl

        BACKEND = "python"
elif _requested in ("python", "pure"):
    from . import pure as _impl

    BACKEND = "python"
else:
    raise ImportError(
        f"unknown TABP_KERNEL value {_requested!r}; use 'compiled' or 'python'"
    )

simulate_stats = _impl.simulate_stats
sample_germs = _impl.sample_germs


def get_backend(name: str):
    """Fetch a backend module by name ('python' or 'compiled')."""
    if name == "python":
        from . import pure

        return pure
    if name == "compiled":
        from . import _speedups

        return _speedups
    raise ValueError(f"unknown backend {name!r}")


def available_backends() -> list[str]:
    out = ["python"]
    try:
        from . import _speedups  # noqa: F401

        out.append("compiled")
    except ImportError:
        pass
    return out
