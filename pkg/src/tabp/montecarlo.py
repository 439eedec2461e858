"""Monte Carlo verification runs.

Drives many independent replicates of the window simulation, aggregates
their statistics, and compares each against its closed-form target:

* vacancy probes          P(t vacant), binomial SE around the exact value
* covered fraction        exact finite-window expectation
* vacant length           exact finite-window expectation
* gap lengths             pooled complete gaps against Exp(lam) by KS
* gap count               mean against lam * E[vacant length] (an exact
                          identity on the half-line window: every complete
                          gap is closed by exactly one exposed germ), plus
                          a geometric fit of the total count where that
                          law applies
* growth curve            gap-count growth along a ladder of windows

Determinism: replicate r always uses the stream (master_seed, r), results
are assembled by replicate index, and reports carry no timing or worker
information, so a report is byte-identical across runs and worker counts.
Replicates of growth-curve points reuse the same per-replicate streams at
every ladder window, which nests the realizations and makes the count
monotone along the ladder path by path.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .analytics import ClosedForms
from .classifier import Regime, classify
from .distributions import GrainDistribution
from .process import left_buffer_length, make_stream
from .stats import bin_counts, chisquare_test, exponential_cdf, geometric_bin_probs, ks_test

DEFAULT_SECTIONS = ("vacancy", "covered_fraction", "vacant_length", "gaps", "nv")
ALL_SECTIONS = DEFAULT_SECTIONS + ("growth_curve",)
GAP_POOL_CAP = 1 << 20
MIN_KS_POOL = 500
MIN_GEOMETRIC_REPLICATES = 500
MIN_EXPECTED_CELL = 5.0
GEOMETRIC_RESIDUAL_TOL = 1e-6


@dataclass(frozen=True)
class McConfig:
    """One verification run: model, window, replication, and checks."""

    lam: float
    dist: GrainDistribution
    line: str = "half"
    T: float = 100.0
    replicates: int = 200
    master_seed: int = 0
    probes: tuple[float, ...] = ()
    sections: tuple[str, ...] = DEFAULT_SECTIONS
    sigma: float = 4.0
    p_threshold: float = 0.01
    buffer_eps: float = 1e-4
    growth_factors: tuple[float, ...] = (1e-3, 1e-2, 1e-1, 1.0)
    growth_rel_tol: float = 0.10

    def __post_init__(self):
        if self.line not in ("half", "full"):
            raise ValueError(f"line must be 'half' or 'full', got {self.line!r}")
        if not (self.T > 0 and math.isfinite(self.T)):
            raise ValueError(f"window length must be positive and finite, got {self.T}")
        if self.replicates < 1:
            raise ValueError("need at least one replicate")
        unknown = set(self.sections) - set(ALL_SECTIONS)
        if unknown:
            raise ValueError(f"unknown sections {sorted(unknown)}; known: {ALL_SECTIONS}")
        for p in self.probes:
            if not (0.0 <= p <= self.T):
                raise ValueError(f"probe {p} outside the window [0, {self.T}]")

    def config_dict(self) -> dict:
        return {
            "lam": self.lam,
            "dist": self.dist.spec_string(),
            "line": self.line,
            "T": self.T,
            "replicates": self.replicates,
            "master_seed": self.master_seed,
            "probes": list(self.probes),
            "sections": list(self.sections),
            "sigma": self.sigma,
            "p_threshold": self.p_threshold,
            "buffer_eps": self.buffer_eps,
            "growth_factors": list(self.growth_factors),
            "growth_rel_tol": self.growth_rel_tol,
        }


@dataclass
class ReplicateStats:
    covered: float
    n_gaps: int
    gap_lengths: np.ndarray
    probe_covered: np.ndarray
    n_clamped: int
    recon_err: float


def _gap_capacity(expected_gaps: float) -> int:
    mu = max(expected_gaps, 0.0)
    return int(1.5 * mu + 6.0 * math.sqrt(mu) + 64.0)


def _run_replicate(rep_index, master_seed, lam, start, end, fam, p0, p1, ty, ts,
                   probes_arr, gap_cap) -> ReplicateStats:
    rng = make_stream(master_seed, rep_index)
    probe_out = np.zeros(len(probes_arr), dtype=np.uint8)
    while True:
        state = rng.bit_generator.state
        gaps_out = np.empty(gap_cap, dtype=np.float64)
        (n_germs, n_clamped, n_gaps, covered, gap_total, left_c, right_c) = (
            _kernels.simulate_stats(rng, lam, start, end, fam, p0, p1, ty, ts,
                                    probes_arr, probe_out, gaps_out)
        )
        if n_gaps <= gap_cap:
            break
        # gap buffer overflow: rewind the stream, rerun with the exact count
        rng.bit_generator.state = state
        gap_cap = n_gaps
    recon = abs(covered + gap_total + left_c + right_c - end)
    return ReplicateStats(
        covered=covered,
        n_gaps=n_gaps,
        gap_lengths=gaps_out[:n_gaps].copy(),
        probe_covered=probe_out.copy(),
        n_clamped=n_clamped,
        recon_err=recon,
    )


def _run_batch(cfg: McConfig, T: float, probes: tuple[float, ...], workers: int,
               start: float) -> list[ReplicateStats]:
    fam, p0, p1, ty, ts = _kernels.params_for(cfg.dist)
    probes_arr = np.asarray(sorted(probes), dtype=np.float64)
    cf = ClosedForms(cfg.lam, cfg.dist)
    if cfg.line == "half":
        expected_gaps = cfg.lam * cf.expected_vacant_length(T)
    else:
        expected_gaps = cfg.lam * T * cf.stationary_vacancy()
    gap_cap = _gap_capacity(expected_gaps)

    def work(r):
        return _run_replicate(r, cfg.master_seed, cfg.lam, start, T, fam, p0, p1,
                              ty, ts, probes_arr, gap_cap)

    if workers <= 1:
        return [work(r) for r in range(cfg.replicates)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(work, range(cfg.replicates)))


def _mean_check(values, target, sigma):
    n = len(values)
    est = float(np.mean(values))
    se = float(np.std(values, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    if se > 0.0:
        z = (est - target) / se
    else:
        z = 0.0 if est == target else math.inf
    return {
        "n": n,
        "target": target,
        "estimate": est,
        "se": se,
        "z": z,
        "pass": abs(z) <= sigma,
    }


def _section_vacancy(cfg, probes_sorted, reps):
    cf = ClosedForms(cfg.lam, cfg.dist)
    mat = np.stack([r.probe_covered for r in reps])
    n = len(reps)
    out = []
    all_pass = True
    for j, t in enumerate(probes_sorted):
        if cfg.line == "half":
            target = cf.vacancy_probability(t)
        else:
            target = cf.stationary_vacancy()
        est = float(np.mean(mat[:, j] == 0))
        se = math.sqrt(target * (1.0 - target) / n)
        if se > 0.0:
            z = (est - target) / se
        else:
            z = 0.0 if est == target else math.inf
        passed = abs(z) <= cfg.sigma
        all_pass = all_pass and passed
        out.append({"t": t, "target": target, "estimate": est, "se": se, "z": z, "pass": passed})
    return {"probes": out, "pass": all_pass}


def _section_covered_fraction(cfg, reps):
    cf = ClosedForms(cfg.lam, cfg.dist)
    if cfg.line == "half":
        target = cf.mean_covered_fraction(cfg.T)
    else:
        target = cf.covered_volume_fraction()
    values = np.array([r.covered / cfg.T for r in reps])
    return _mean_check(values, target, cfg.sigma)


def _section_vacant_length(cfg, reps):
    cf = ClosedForms(cfg.lam, cfg.dist)
    if cfg.line == "half":
        target = cf.expected_vacant_length(cfg.T)
    else:
        target = cfg.T * cf.stationary_vacancy()
    values = np.array([cfg.T - r.covered for r in reps])
    return _mean_check(values, target, cfg.sigma)


def _pooled_gaps(reps):
    pool = []
    total = 0
    for r in reps:
        if total < GAP_POOL_CAP:
            pool.append(r.gap_lengths[: GAP_POOL_CAP - total])
            total += len(pool[-1])
    return np.concatenate(pool) if pool else np.empty(0)


def _section_gaps(cfg, reps):
    pooled = _pooled_gaps(reps)
    n_total = int(sum(r.n_gaps for r in reps))
    if len(pooled) < MIN_KS_POOL:
        return {
            "skipped": True,
            "n_pooled": len(pooled),
            "note": f"only {len(pooled)} complete gaps pooled; "
            f"need {MIN_KS_POOL} for a stable distributional check",
        }
    res = ks_test(pooled, exponential_cdf(cfg.lam))
    out = {
        "n_pooled": len(pooled),
        "rate": cfg.lam,
        "ks_d": res.statistic,
        "pvalue": res.pvalue,
        "pass": res.pvalue > cfg.p_threshold,
    }
    if n_total > len(pooled):
        out["note"] = f"pool capped at {GAP_POOL_CAP} of {n_total} gaps"
    return out


def _section_nv(cfg, reps):
    cf = ClosedForms(cfg.lam, cfg.dist)
    if cfg.line == "half":
        target = cfg.lam * cf.expected_vacant_length(cfg.T)
    else:
        m = cfg.lam * cfg.T * cf.stationary_vacancy()
        # subtract the one possibly straddling gap's chance of closing
        # inside the window
        target = m - cf.stationary_vacancy() * -math.expm1(-cfg.lam * cfg.T)
    counts = np.array([r.n_gaps for r in reps], dtype=np.float64)
    out = _mean_check(counts, target, cfg.sigma)

    geom: dict
    if cfg.line != "half":
        geom = {"skipped": True, "note": "total gap count is geometric only for the half-line process"}
    else:
        verdict = classify(cfg.lam, cfg.dist)
        p = cf.nv_geometric_parameter()
        if verdict.regime is not Regime.UNBOUNDED_COMPONENT:
            geom = {
                "skipped": True,
                "note": f"total gap count is a.s. infinite outside the unbounded-component "
                f"regime (verdict: {verdict.regime_label()})",
            }
        else:
            residual = 1.0 / p - cfg.lam * cf.expected_vacant_length(cfg.T)
            if residual > GEOMETRIC_RESIDUAL_TOL:
                geom = {
                    "skipped": True,
                    "note": f"window too short to observe the total count: expected "
                    f"{residual:.3g} gaps fall beyond T",
                }
            elif len(reps) < MIN_GEOMETRIC_REPLICATES:
                geom = {
                    "skipped": True,
                    "note": f"{len(reps)} replicates; need {MIN_GEOMETRIC_REPLICATES} "
                    "for stable cell counts",
                }
            else:
                probs = geometric_bin_probs(p, 4)
                expected_min = len(reps) * probs.min()
                if expected_min < MIN_EXPECTED_CELL:
                    geom = {
                        "skipped": True,
                        "note": f"smallest expected cell {expected_min:.2f} < {MIN_EXPECTED_CELL}",
                    }
                else:
                    obs = bin_counts(counts.astype(np.int64), 4)
                    res = chisquare_test(obs, probs)
                    geom = {
                        "p_geometric": p,
                        "bins": ["1", "2", "3", ">=4"],
                        "observed": obs.tolist(),
                        "expected": list(res.expected),
                        "statistic": res.statistic,
                        "df": res.df,
                        "pvalue": res.pvalue,
                        "pass": res.pvalue > cfg.p_threshold,
                    }
    out["geometric"] = geom
    if not geom.get("skipped"):
        out["pass"] = bool(out["pass"] and geom["pass"])
    return out


def _section_growth(cfg, workers, start):
    cf = ClosedForms(cfg.lam, cfg.dist)
    points = []
    means = []
    all_pass = True
    for factor in sorted(cfg.growth_factors):
        Tk = cfg.T * factor
        reps = _run_batch(cfg, Tk, (), workers, start)
        counts = np.array([r.n_gaps for r in reps], dtype=np.float64)
        fractions = np.array([r.covered / Tk for r in reps])
        if cfg.line == "half":
            target = cfg.lam * cf.expected_vacant_length(Tk)
            cf_target = cf.mean_covered_fraction(Tk)
        else:
            target = cf.stationary_vacancy() * (cfg.lam * Tk + math.expm1(-cfg.lam * Tk))
            cf_target = cf.covered_volume_fraction()
        est = float(np.mean(counts))
        se = float(np.std(counts, ddof=1) / math.sqrt(len(counts))) if len(counts) > 1 else 0.0
        rel_err = abs(est - target) / target if target > 0 else math.inf
        z = (est - target) / se if se > 0 else (0.0 if est == target else math.inf)
        passed = rel_err <= cfg.growth_rel_tol or abs(z) <= cfg.sigma
        all_pass = all_pass and passed
        means.append(est)
        points.append({
            "T": Tk,
            "target": target,
            "mean_nv": est,
            "se": se,
            "rel_err": rel_err,
            "mean_covered_fraction": float(np.mean(fractions)),
            "covered_fraction_target": cf_target,
            "pass": passed,
        })
    increasing = all(b > a for a, b in zip(means[:-1], means[1:]))
    return {
        "points": points,
        "strictly_increasing": increasing,
        "pass": bool(all_pass and increasing),
    }


def run(cfg: McConfig, workers: int = 1, csv_path: str | None = None,
        gaps_csv_path: str | None = None) -> dict:
    """Execute the configured sections and return the report dict.

    The report depends only on the config (worker count and wall time
    leave no trace), so fixed seeds give byte-identical JSON.  The
    optional paths dump per-replicate rows of the main batch as CSV.
    """
    start = 0.0
    if cfg.line == "full":
        start = -left_buffer_length(cfg.lam, cfg.dist, cfg.buffer_eps)
    probes_sorted = tuple(sorted(cfg.probes))
    need_main = any(s in cfg.sections for s in DEFAULT_SECTIONS) or csv_path or gaps_csv_path
    reps: list[ReplicateStats] = []
    if need_main:
        reps = _run_batch(cfg, cfg.T, probes_sorted, workers, start)
    if csv_path:
        write_replicates_csv(csv_path, reps, cfg.T)
    if gaps_csv_path:
        write_gaps_csv(gaps_csv_path, reps)

    sections = {}
    if "vacancy" in cfg.sections:
        if probes_sorted:
            sections["vacancy"] = _section_vacancy(cfg, probes_sorted, reps)
        else:
            sections["vacancy"] = {"skipped": True, "note": "no probes configured"}
    if "covered_fraction" in cfg.sections:
        sections["covered_fraction"] = _section_covered_fraction(cfg, reps)
    if "vacant_length" in cfg.sections:
        sections["vacant_length"] = _section_vacant_length(cfg, reps)
    if "gaps" in cfg.sections:
        sections["gaps"] = _section_gaps(cfg, reps)
    if "nv" in cfg.sections:
        sections["nv"] = _section_nv(cfg, reps)
    if "growth_curve" in cfg.sections:
        sections["growth_curve"] = _section_growth(cfg, workers, start)

    checked = [s for s in sections.values() if not s.get("skipped")]
    overall = all(s["pass"] for s in checked) if checked else True
    report = {
        "schema": 1,
        "config": cfg.config_dict(),
        "n_replicates_run": len(reps),
        "n_clamped_total": int(sum(r.n_clamped for r in reps)),
        "reconciliation_max_err": float(max((r.recon_err for r in reps), default=0.0)),
        "sections": sections,
        "overall_pass": overall,
    }
    return report


# -- serialization ----------------------------------------------------------

def to_jsonable(obj):
    """Recursively convert to JSON-encodable types; non-finite floats
    become the strings "inf", "-inf", "nan"."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isfinite(x):
            return x
        if math.isnan(x):
            return "nan"
        return "inf" if x > 0 else "-inf"
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, int, str)) or obj is None:
        return obj
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def report_json(report: dict) -> str:
    """Canonical JSON text of a report (stable key order and float repr)."""
    return json.dumps(to_jsonable(report), sort_keys=True, indent=2)


def write_replicates_csv(path: str, reps: list[ReplicateStats], T: float) -> None:
    with open(path, "w") as fh:
        fh.write("replicate,covered_fraction,n_vacant,vacant_length,n_clamped\n")
        for i, r in enumerate(reps):
            fh.write(f"{i},{r.covered / T!r},{r.n_gaps},{T - r.covered!r},{r.n_clamped}\n")


def write_gaps_csv(path: str, reps: list[ReplicateStats]) -> None:
    with open(path, "w") as fh:
        fh.write("replicate,gap_index,length\n")
        for i, r in enumerate(reps):
            for j, g in enumerate(r.gap_lengths):
                fh.write(f"{i},{j},{float(g)!r}\n")
