"""Coverage of the line by rightward Poisson grains: simulation,
closed-form analytics, and regime classification."""

__version__ = "0.1.0"

from .analytics import ClosedForms
from .classifier import Method, Regime, RegimeVerdict, classify, unbounded_component_exists
from .distributions import (
    Constant,
    DistributionError,
    Exponential,
    GrainDistribution,
    Pareto,
    TabulatedTail,
    parse_distribution,
)
from .geometry import ComponentDecomposition, decompose, point_vacant
from .montecarlo import McConfig, report_json, run
from .process import (
    InfeasibleError,
    ModelParams,
    Realization,
    left_buffer_length,
    make_stream,
    sample_fullline,
    sample_halfline,
    sample_window,
)

__all__ = [
    "__version__",
    "ClosedForms",
    "ComponentDecomposition",
    "Constant",
    "DistributionError",
    "Exponential",
    "GrainDistribution",
    "InfeasibleError",
    "McConfig",
    "Method",
    "ModelParams",
    "Pareto",
    "Realization",
    "Regime",
    "RegimeVerdict",
    "TabulatedTail",
    "classify",
    "decompose",
    "left_buffer_length",
    "make_stream",
    "parse_distribution",
    "point_vacant",
    "report_json",
    "run",
    "sample_fullline",
    "sample_halfline",
    "sample_window",
    "unbounded_component_exists",
]
