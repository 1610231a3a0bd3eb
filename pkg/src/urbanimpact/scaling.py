"""Power-law scaling of employment aggregates against city size.

Fits (number of workers) = c * (city size)^beta by ordinary least squares in
log10 space.  "City size" is total employment, the variable the regressions
actually use.  Cities with zero workers in a series are dropped from that
fit (log undefined) and counted in the diagnostics.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .corpus import Corpus
from .errors import NonPositiveValue, RateOutOfRange, TooFewPoints
from .seeding import substream

UNASSIGNED = "unassigned"


@dataclass
class ScalingFit:
    series_id: str
    beta: float
    intercept: float         # log10-space intercept
    stderr_beta: float
    r2: float
    n: int
    n_dropped: int = 0


@dataclass
class BootstrapInterval:
    stderr: float
    lo: float
    hi: float
    n_boot: int


@dataclass
class StabilityResult:
    subsample_rate: float
    trials: int
    beta_by_rank: list[list[float]]   # [rank][trial]


@dataclass
class PlotSeries:
    cluster_id: str
    log_size: np.ndarray
    log_count: np.ndarray
    beta: float
    intercept: float
    shifted: bool


def fit_power_law(sizes, counts, series_id: str = "series") -> ScalingFit:
    """OLS of log10(count) on log10(size).

    Requires at least 3 strictly positive pairs after dropping zero counts.
    Standard errors come from the usual closed-form OLS expressions.
    """
    sizes = np.asarray(sizes, dtype=float)
    counts = np.asarray(counts, dtype=float)
    if sizes.shape != counts.shape:
        raise NonPositiveValue("sizes and counts must have equal length")
    if not (np.isfinite(sizes).all() and np.isfinite(counts).all()):
        raise NonPositiveValue("sizes and counts must be finite")
    if (sizes <= 0).any():
        raise NonPositiveValue("city sizes must be strictly positive")
    if (counts < 0).any():
        raise NonPositiveValue("counts must be non-negative")
    keep = counts > 0
    n_dropped = int((~keep).sum())
    x = np.log10(sizes[keep])
    y = np.log10(counts[keep])
    n = x.size
    if n < 3:
        raise TooFewPoints(f"need >= 3 positive pairs, have {n}")
    sxx = ((x - x.mean()) ** 2).sum()
    if sxx <= 0:
        raise NonPositiveValue("sizes are constant; slope undefined")
    beta = ((x - x.mean()) * (y - y.mean())).sum() / sxx
    intercept = y.mean() - beta * x.mean()
    resid = y - (intercept + beta * x)
    rss = (resid ** 2).sum()
    tss = ((y - y.mean()) ** 2).sum()
    stderr = float(np.sqrt(rss / (n - 2) / sxx)) if n > 2 else 0.0
    r2 = 1.0 if tss == 0 else float(1.0 - rss / tss)
    return ScalingFit(series_id=series_id, beta=float(beta), intercept=float(intercept),
                      stderr_beta=stderr, r2=r2, n=n, n_dropped=n_dropped)


def bootstrap_beta(sizes, counts, n_boot: int = 1000, seed: int = 0,
                   ci: float = 0.95) -> BootstrapInterval:
    """Percentile bootstrap over cities for the scaling exponent.

    Resamples with zero size variance cannot be fit and are excluded from
    the percentile computation; the effective count is reported.
    """
    sizes = np.asarray(sizes, dtype=float)
    counts = np.asarray(counts, dtype=float)
    keep = counts > 0
    x = np.log10(sizes[keep])
    y = np.log10(counts[keep])
    n = x.size
    if n < 3:
        raise TooFewPoints(f"need >= 3 positive pairs, have {n}")
    rng = substream(seed)
    idx = rng.integers(0, n, size=(n_boot, n))
    xs = x[idx]
    ys = y[idx]
    xm = xs.mean(axis=1, keepdims=True)
    ym = ys.mean(axis=1, keepdims=True)
    sxx = ((xs - xm) ** 2).sum(axis=1)
    sxy = ((xs - xm) * (ys - ym)).sum(axis=1)
    valid = sxx > 0
    betas = sxy[valid] / sxx[valid]
    alpha = (1.0 - ci) / 2.0
    lo, hi = np.percentile(betas, [100 * alpha, 100 * (1 - alpha)])
    return BootstrapInterval(stderr=float(betas.std(ddof=1)),
                             lo=float(lo), hi=float(hi), n_boot=int(valid.sum()))


def cluster_counts(corpus: Corpus, cluster_assignment: dict[str, str],
                   include_unassigned: bool = True) -> dict[str, np.ndarray]:
    """Per-cluster worker counts per city (occupations pooled before fitting).

    Occupations absent from the assignment are collected under the reserved
    ``unassigned`` key, or skipped entirely when ``include_unassigned`` is
    false (subsampling trials fit only the clustered occupations).
    """
    groups: dict[str, np.ndarray] = {}
    for j, occ in enumerate(corpus.occupations):
        group = cluster_assignment.get(occ)
        if group is None:
            if not include_unassigned:
                continue
            group = UNASSIGNED
        if group not in groups:
            groups[group] = np.zeros(len(corpus.cities))
        groups[group] += corpus.employment[:, j]
    return dict(sorted(groups.items()))


def cluster_scaling(corpus: Corpus, cluster_assignment: dict[str, str],
                    include_unassigned: bool = True) -> dict[str, ScalingFit]:
    """Fit one scaling exponent per occupation cluster."""
    sizes = corpus.city_sizes()
    return {
        group: fit_power_law(sizes, counts, series_id=group)
        for group, counts in cluster_counts(
            corpus, cluster_assignment, include_unassigned).items()
    }


def _stability_trial(corpus: Corpus, k: int, rate: float, seed: int,
                     rate_index: int, trial: int) -> list[float]:
    from .clustering import job_clusters

    rng = substream(seed, rate_index, trial)
    uncovered = set(corpus.skill_uncovered)
    covered = [o for o in corpus.occupations if o not in uncovered]
    n_sub = int(np.floor(rate * len(covered)))
    chosen = rng.choice(len(covered), size=n_sub, replace=False)
    subset = sorted(covered[i] for i in chosen)
    # clustering inside a trial reuses the base seed: the trial stream only
    # drives the subsample, so rate 1.0 reproduces the full-corpus fit
    assignment = job_clusters(corpus, k=k, seed=seed, occupations=subset)
    betas = []
    sizes = corpus.city_sizes()
    for group, counts in cluster_counts(
            corpus, assignment.labels, include_unassigned=False).items():
        try:
            betas.append(fit_power_law(sizes, counts, series_id=group).beta)
        except TooFewPoints:
            betas.append(float("nan"))
    betas.sort(key=lambda b: (np.isnan(b), -b if not np.isnan(b) else 0.0))
    while len(betas) < k:
        betas.append(float("nan"))
    return betas[:k]


def scaling_stability(corpus: Corpus, k: int, rates, trials: int, seed: int,
                      workers: int = 1) -> list[StabilityResult]:
    """Re-cluster subsampled occupations and record ranked exponents.

    Per trial: subsample occupations uniformly without replacement at the
    given rate, run k-means job clustering on the subsample, fit each
    cluster's exponent, and record the exponents sorted descending (rank 0
    is the fastest-growing cluster).  Deterministic given the seed.
    """
    rates = list(rates)
    for rate in rates:
        if not 0 < rate <= 1:
            raise RateOutOfRange(f"rate {rate} outside (0, 1]")
    results = []
    for ri, rate in enumerate(rates):
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                ranked = list(pool.map(
                    lambda t: _stability_trial(corpus, k, rate, seed, ri, t),
                    range(trials)))
        else:
            ranked = [_stability_trial(corpus, k, rate, seed, ri, t)
                      for t in range(trials)]
        beta_by_rank = [[ranked[t][r] for t in range(trials)] for r in range(k)]
        results.append(StabilityResult(subsample_rate=rate, trials=trials,
                                       beta_by_rank=beta_by_rank))
    return results


def loglog_plot_points(corpus: Corpus, cluster_assignment: dict[str, str],
                       normalize_shift: bool = False) -> list[PlotSeries]:
    """Per-cluster (log10 size, log10 count) series for the scaling figure.

    With ``normalize_shift`` each series is shifted down by its fitted
    intercept so clusters with different prefactors are comparable; the
    fitted line then passes through the origin in log space.
    """
    sizes = corpus.city_sizes()
    series = []
    for group, counts in cluster_counts(corpus, cluster_assignment).items():
        fit = fit_power_law(sizes, counts, series_id=group)
        keep = counts > 0
        log_size = np.log10(sizes[keep])
        log_count = np.log10(counts[keep])
        if normalize_shift:
            log_count = log_count - fit.intercept
        series.append(PlotSeries(
            cluster_id=group, log_size=log_size, log_count=log_count,
            beta=fit.beta, intercept=0.0 if normalize_shift else fit.intercept,
            shifted=normalize_shift,
        ))
    return series


def reference_line(series: list[PlotSeries]) -> tuple[np.ndarray, np.ndarray]:
    """Endpoints of the dashed slope-1 reference across the plotted range."""
    lo = min(float(s.log_size.min()) for s in series)
    hi = max(float(s.log_size.max()) for s in series)
    mid_y = np.mean([float(s.log_count.mean()) for s in series])
    mid_x = 0.5 * (lo + hi)
    x = np.array([lo, hi])
    return x, mid_y + (x - mid_x)
