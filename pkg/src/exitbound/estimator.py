"""Exit-time quantile estimation and eigenvalue lower bounds.

d_p is the smallest time by which the process has left the domain with
probability at least 1-p; the eigenvalue bound is log(1/p)/d_p.  Point
estimates use order statistics and confidence intervals use
distribution-free binomial rank inversion, so no shape assumption is made
about the exit-time law.  Censored paths sort as +infinity, i.e. they count
as survivors at every observed time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import binom

from .errors import HorizonError
from .sde import ExitTimeSample

# Below this many expected tail samples the point estimate is flagged.
MIN_TAIL_SAMPLES = 10

REPORT_JSON_FIELDS = ("problem", "start", "p", "n_paths", "dt", "d_p", "d_lo",
                      "d_hi", "bound", "certified_bound", "censored_fraction",
                      "seed")


@dataclass(frozen=True)
class QuantileBoundReport:
    """d_p estimate, confidence interval and eigenvalue bound for one (start, p).

    certified_bound evaluates the bound at the upper confidence endpoint of
    d_p, so it is a conservative lower bound for lambda_1 at the stated
    confidence; bound mirrors the plain point estimate.
    """

    problem: str
    start: tuple[float, ...]
    p: float
    d_p: float
    d_lo: float
    d_hi: float
    bound: float
    certified_bound: float
    censored_fraction: float
    confidence: float
    n_paths: int | None = None
    dt: float | None = None
    seed: int | None = None
    warning: str | None = None

    def to_json_dict(self) -> dict:
        """Flat record with exactly the documented keys, in stable order."""
        values = {
            "problem": self.problem,
            "start": list(self.start),
            "p": self.p,
            "n_paths": self.n_paths,
            "dt": self.dt,
            "d_p": self.d_p,
            "d_lo": self.d_lo,
            "d_hi": None if math.isinf(self.d_hi) else self.d_hi,
            "bound": self.bound,
            "certified_bound": self.certified_bound,
            "censored_fraction": self.censored_fraction,
            "seed": self.seed,
        }
        return {k: values[k] for k in REPORT_JSON_FIELDS}


def empirical_survival(sample: ExitTimeSample, t: float) -> float:
    """Fraction of paths alive at time t; censored paths count as alive."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t > sample.config.t_max:
        raise HorizonError(
            f"t={t} exceeds the horizon t_max={sample.config.t_max}; "
            "survival beyond the horizon is not identified")
    times = sample.exit_times()
    return float(np.mean(times >= t))


def quantile_bound(d_p: float, p: float) -> float:
    """The eigenvalue lower bound log(1/p)/d_p."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0,1), got {p}")
    if d_p <= 0.0:
        raise ValueError(f"d_p must be positive, got {d_p}")
    return math.log(1.0 / p) / d_p


def theorem_rhs(lam: float, p: float, u_ratio: float) -> float:
    """Pointwise lower bound (1/lam) log(u_ratio / p) on d_p.

    u_ratio is |u(x)|/||u||_inf in (0, 1]; the result is negative (vacuous)
    when u_ratio < p.
    """
    if lam <= 0.0:
        raise ValueError("lam must be positive")
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0,1), got {p}")
    if not 0.0 < u_ratio <= 1.0:
        raise ValueError(f"u_ratio must lie in (0,1], got {u_ratio}")
    return math.log(u_ratio / p) / lam


def _order_statistic_ranks(n: int, q: float, confidence: float) -> tuple[int, int]:
    """Ranks (l, u) with P(tau_(l) <= Q_q <= tau_(u)) >= confidence.

    Distribution-free: with B ~ Binomial(n, q) counting observations below
    the true quantile, coverage is P(l <= B <= u-1); ranks are chosen
    equal-tailed.  u may exceed n, meaning no finite upper bound exists at
    this confidence.
    """
    alpha = 1.0 - confidence
    l = int(binom.ppf(alpha / 2.0, n, q))
    u = int(binom.ppf(1.0 - alpha / 2.0, n, q)) + 1
    return max(1, l), u


def estimate_d_p(sample: ExitTimeSample, p: float,
                 confidence: float = 0.95) -> QuantileBoundReport:
    """Estimate d_p from a batch by order statistics, with a binomial CI.

    The point estimate is the ceil((1-p) n)-th ascending order statistic of
    the exit times (censored last).  Requires the censored fraction to stay
    below p, otherwise d_p is not identified below the horizon.
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0,1), got {p}")
    if not 0.0 < confidence < 1.0:
        raise ValueError("confidence must lie in (0,1)")
    cf = sample.censored_fraction
    if cf >= p:
        raise HorizonError(
            f"censored fraction {cf:.4g} >= p={p}: the p-quantile lies beyond "
            "t_max; raise t_max and rerun")

    times = np.sort(sample.exit_times())
    n = len(times)
    rank = math.ceil((1.0 - p) * n)
    rank = min(max(rank, 1), n)
    d_hat = float(times[rank - 1])

    l, u = _order_statistic_ranks(n, 1.0 - p, confidence)
    d_lo = float(times[l - 1])
    d_hi = float(times[u - 1]) if u <= n else math.inf

    warnings = []
    if n * p < MIN_TAIL_SAMPLES:
        warnings.append(
            f"only n*p = {n * p:.3g} expected tail samples (< {MIN_TAIL_SAMPLES}); "
            "the quantile estimate is unstable")
    if math.isinf(d_hi):
        warnings.append("no finite upper confidence bound at this confidence level")

    bound = quantile_bound(d_hat, p)
    certified = 0.0 if math.isinf(d_hi) else quantile_bound(d_hi, p)
    cfg = sample.config
    return QuantileBoundReport(
        problem=sample.problem_id, start=cfg.start_point, p=p,
        d_p=d_hat, d_lo=d_lo, d_hi=d_hi, bound=bound, certified_bound=certified,
        censored_fraction=cf, confidence=confidence, n_paths=cfg.n_paths,
        dt=cfg.dt, seed=cfg.master_seed,
        warning="; ".join(warnings) if warnings else None)


def sup_over_starts(reports: Sequence[QuantileBoundReport]) -> QuantileBoundReport:
    """The report with maximal d_p over a start-point sweep (ties: first).

    This realizes the supremum over start points in the bound; the returned
    report carries the smallest (hence valid) eigenvalue bound.
    """
    if not reports:
        raise ValueError("need at least one report")
    p0 = reports[0].p
    if any(r.p != p0 for r in reports):
        raise ValueError("sup_over_starts requires identical p across reports")
    best = reports[0]
    for r in reports[1:]:
        if r.d_p > best.d_p:
            best = r
    return best
