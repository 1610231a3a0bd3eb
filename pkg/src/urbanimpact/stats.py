"""Correlation, regression, validation, and binned-profile statistics.

P-values are computed exactly from the t (and F) distributions through the
regularized incomplete beta function, evaluated with a continued fraction:
the correlations of interest reach p < 1e-28, far beyond what a normal
approximation can represent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .corpus import Corpus
from .errors import (
    DegenerateRange,
    LengthMismatch,
    RankDeficient,
    TooFewRows,
    ZeroVariance,
)
from .metrics import city_metrics_table
from .seeding import substream

# ---------------------------------------------------------------------------
# regularized incomplete beta (continued fraction, Lentz's method)
# ---------------------------------------------------------------------------

_MAX_ITER = 300
_EPS = 3e-16
_FPMIN = 1e-300


def _betacf(a: float, b: float, x: float) -> float:
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return h


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must be in [0, 1]")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_sf_two_sided(t: float, dof: float) -> float:
    """P(|T| > t) for Student's t with the given degrees of freedom."""
    if math.isinf(t):
        return 0.0
    return regularized_incomplete_beta(dof / 2.0, 0.5, dof / (dof + t * t))


def f_sf(f: float, d1: float, d2: float) -> float:
    """P(F > f) for the F distribution."""
    if f <= 0:
        return 1.0
    return regularized_incomplete_beta(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f))


# ---------------------------------------------------------------------------
# Pearson correlation
# ---------------------------------------------------------------------------

@dataclass
class CorrelationResult:
    r: float
    p: float
    n: int


def pearson(x, y) -> CorrelationResult:
    """Product-moment correlation with an exact two-sided t-test p-value."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise LengthMismatch(f"length mismatch: {x.shape} vs {y.shape}")
    n = x.size
    if n < 3:
        raise TooFewRows(f"need n >= 3, have {n}")
    xc = x - x.mean()
    yc = y - y.mean()
    sxx = (xc ** 2).sum()
    syy = (yc ** 2).sum()
    if sxx <= 0 or syy <= 0:
        raise ZeroVariance("both series need positive variance")
    r = float((xc * yc).sum() / math.sqrt(sxx * syy))
    r = max(-1.0, min(1.0, r))
    if abs(r) == 1.0:
        p = 0.0
    else:
        t = abs(r) * math.sqrt((n - 2) / (1.0 - r * r))
        p = t_sf_two_sided(t, n - 2)
    return CorrelationResult(r=r, p=p, n=n)


# ---------------------------------------------------------------------------
# OLS regression
# ---------------------------------------------------------------------------

@dataclass
class RegressionFit:
    model_id: str
    variables: list[str]
    coef: np.ndarray
    stderr: np.ndarray
    intercept: float
    intercept_stderr: float
    r2: float
    adj_r2: float
    model_p: float
    n: int
    residuals: np.ndarray             # original response units, sum ~ 0
    row_ids: list[str] | None = None
    standardized: bool = True


def ols(design, response, variables=None, standardize: bool = True,
        model_id: str = "model", row_ids=None) -> RegressionFit:
    """Least squares with intercept via SVD-based solve.

    With ``standardize`` the covariates and the response are z-scored
    (population standard deviation) before fitting, giving comparable
    coefficients; residuals are reported in original response units either
    way.  Standard errors use the unbiased residual variance and the inverse
    normal matrix.
    """
    x = np.asarray(design, dtype=float)
    y = np.asarray(response, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    n, p = x.shape
    if y.shape != (n,):
        raise LengthMismatch(f"response length {y.shape} != design rows {n}")
    if n <= p + 1:
        raise TooFewRows(f"need n > covariates + 1, have n={n}, p={p}")
    if variables is None:
        variables = [f"x{i}" for i in range(p)]

    y_mean, y_std = y.mean(), y.std()
    if standardize:
        x_std = x.std(axis=0)
        if (x_std <= 0).any():
            bad = variables[int(np.argmax(x_std <= 0))]
            raise ZeroVariance(f"covariate {bad!r} has zero variance")
        if y_std <= 0:
            raise ZeroVariance("response has zero variance")
        xw = (x - x.mean(axis=0)) / x_std
        yw = (y - y_mean) / y_std
    else:
        if y_std <= 0:
            raise ZeroVariance("response has zero variance")
        xw, yw = x, y

    a = np.column_stack([np.ones(n), xw])
    if np.linalg.matrix_rank(a) < p + 1:
        raise RankDeficient("design matrix is rank deficient")
    coef_all, *_ = np.linalg.lstsq(a, yw, rcond=None)
    fitted = a @ coef_all
    resid = yw - fitted
    rss = float((resid ** 2).sum())
    tss = float(((yw - yw.mean()) ** 2).sum())
    dof = n - p - 1
    sigma2 = rss / dof
    cov = sigma2 * np.linalg.inv(a.T @ a)
    stderr_all = np.sqrt(np.diag(cov))
    r2 = 1.0 - rss / tss
    adj_r2 = 1.0 - (1.0 - r2) * (n - 1) / dof
    if rss <= 0:
        model_p = 0.0
    else:
        f_stat = (tss - rss) / p / (rss / dof)
        model_p = f_sf(f_stat, p, dof)

    resid_orig = resid * y_std if standardize else resid
    return RegressionFit(
        model_id=model_id,
        variables=list(variables),
        coef=coef_all[1:],
        stderr=stderr_all[1:],
        intercept=float(coef_all[0]),
        intercept_stderr=float(stderr_all[0]),
        r2=float(r2),
        adj_r2=float(adj_r2),
        model_p=float(model_p),
        n=n,
        residuals=resid_orig,
        row_ids=list(row_ids) if row_ids is not None else None,
        standardized=standardize,
    )


# ---------------------------------------------------------------------------
# regression suite over the corpus
# ---------------------------------------------------------------------------

URBAN_COVARIATES = ["size", "income", "bachelor", "gdp", "jobs"]
SPECIALIZATION_COVARIATES = ["H_job", "H_skill", "one_minus_T"]

MODEL_VARIABLES: dict[str, list[str]] = {
    "1": URBAN_COVARIATES,
    "2": ["H_job"],
    "3": ["H_skill"],
    "4": ["one_minus_T"],
    "5": URBAN_COVARIATES + ["H_job"],
    "6": URBAN_COVARIATES + ["H_skill"],
    "7": URBAN_COVARIATES + ["one_minus_T"],
    "8": URBAN_COVARIATES + SPECIALIZATION_COVARIATES,
}


@dataclass
class RegressionSample:
    city_ids: list[str]
    columns: dict[str, np.ndarray]    # covariate name -> per-city values
    response: np.ndarray              # expected impact per city
    dropped: list[str]                # cities without complete covariates


def regression_sample(corpus: Corpus, prob_source: str | None = None) -> RegressionSample:
    """Assemble the per-city design table with listwise deletion.

    Covariates: size (log10 total employment), income, bachelor, gdp (log10
    per-capita), jobs (unique occupations), plus the specialization measures
    H_job, H_skill and 1-T.  Cities missing any covariate are dropped and
    reported.
    """
    table = city_metrics_table(corpus, prob_source)
    rows = []
    dropped = []
    for cm in table:
        cov = corpus.covariates.get(cm.city_id)
        if cov is None or any(math.isnan(v) for v in (
                cov.total_employment, cov.median_income, cov.pct_bachelor,
                cov.gdp_per_capita)):
            dropped.append(cm.city_id)
            continue
        rows.append((cm, cov))
    if not rows:
        raise TooFewRows("no cities have complete covariates")
    city_ids = [cm.city_id for cm, _ in rows]
    columns = {
        "size": np.array([math.log10(cov.total_employment) for _, cov in rows]),
        "income": np.array([cov.median_income for _, cov in rows]),
        "bachelor": np.array([cov.pct_bachelor for _, cov in rows]),
        "gdp": np.array([math.log10(cov.gdp_per_capita) for _, cov in rows]),
        "jobs": np.array([float(cov.n_unique_jobs) for _, cov in rows]),
        "H_job": np.array([cm.h_job for cm, _ in rows]),
        "H_skill": np.array([cm.h_skill for cm, _ in rows]),
        "one_minus_T": np.array([cm.one_minus_theil for cm, _ in rows]),
    }
    response = np.array([cm.expected_impact for cm, _ in rows])
    return RegressionSample(city_ids=city_ids, columns=columns,
                            response=response, dropped=dropped)


def regression_suite(corpus: Corpus, prob_source: str | None = None) -> list[RegressionFit]:
    """Fit the eight standardized models over the regression sample."""
    sample = regression_sample(corpus, prob_source)
    fits = []
    for model_id, variables in MODEL_VARIABLES.items():
        design = np.column_stack([sample.columns[v] for v in variables])
        fits.append(ols(design, sample.response, variables=variables,
                        standardize=True, model_id=model_id,
                        row_ids=sample.city_ids))
    return fits


@dataclass
class ValidationResult:
    model_id: str
    trials: int
    seed: int
    r2_values: np.ndarray


def split_validation(corpus: Corpus, model_id: str = "8", trials: int = 1000,
                     seed: int = 42, prob_source: str | None = None) -> ValidationResult:
    """Repeated random half/half train-test evaluation of one model.

    Each trial fits on a random half of the cities (standardization
    parameters from the training half only) and reports out-of-sample R^2 on
    the held-out half, in original response units.
    """
    variables = MODEL_VARIABLES[model_id]
    sample = regression_sample(corpus, prob_source)
    x = np.column_stack([sample.columns[v] for v in variables])
    y = sample.response
    n = y.size
    n_train = n // 2
    r2s = np.empty(trials)
    for t in range(trials):
        rng = substream(seed, t)
        perm = rng.permutation(n)
        train, test = perm[:n_train], perm[n_train:]
        mu = x[train].mean(axis=0)
        sd = x[train].std(axis=0)
        if (sd <= 0).any():
            raise ZeroVariance("a covariate is constant within a training half")
        y_mu, y_sd = y[train].mean(), y[train].std()
        if y_sd <= 0:
            raise ZeroVariance("response is constant within a training half")
        a = np.column_stack([np.ones(train.size), (x[train] - mu) / sd])
        coef, *_ = np.linalg.lstsq(a, (y[train] - y_mu) / y_sd, rcond=None)
        a_test = np.column_stack([np.ones(test.size), (x[test] - mu) / sd])
        pred = (a_test @ coef) * y_sd + y_mu
        ss_res = ((y[test] - pred) ** 2).sum()
        ss_tot = ((y[test] - y[test].mean()) ** 2).sum()
        r2s[t] = 1.0 - ss_res / ss_tot if ss_tot > 0 else (1.0 if ss_res == 0 else -np.inf)
    return ValidationResult(model_id=model_id, trials=trials, seed=seed, r2_values=r2s)


def residual_ranking(fit: RegressionFit) -> list[tuple[str, float, int]]:
    """Cities ordered by residual ascending (most resilient given the model
    first); ties broken by city_id.  Returns (city_id, residual, rank)."""
    ids = fit.row_ids or [str(i) for i in range(fit.residuals.size)]
    order = sorted(zip(fit.residuals, ids), key=lambda t: (t[0], t[1]))
    return [(cid, float(res), rank + 1) for rank, (res, cid) in enumerate(order)]


# ---------------------------------------------------------------------------
# binned conditional profiles
# ---------------------------------------------------------------------------

@dataclass
class BinnedProfile:
    groups: list[str]
    edges: np.ndarray                 # n_bins + 1 edges over the target
    matrix: np.ndarray                # (n_groups, n_bins); rows sum to 1


def binned_profile(group_values: dict[str, np.ndarray], target_values,
                   n_bins: int = 10) -> BinnedProfile:
    """P(target bin | group) from per-city group importances.

    Bins are equal width over the observed target range (top edge
    inclusive); each group's importance is summed per bin and the row
    normalized to 1.  Empty bins are allowed.
    """
    target = np.asarray(target_values, dtype=float)
    if not np.isfinite(target).all():
        raise DegenerateRange("target contains non-finite values")
    lo, hi = float(target.min()), float(target.max())
    if hi <= lo:
        raise DegenerateRange("target is constant; bins undefined")
    idx = np.clip(((target - lo) / (hi - lo) * n_bins).astype(int), 0, n_bins - 1)
    groups = sorted(group_values)
    matrix = np.zeros((len(groups), n_bins))
    for gi, g in enumerate(groups):
        values = np.asarray(group_values[g], dtype=float)
        if values.shape != target.shape:
            raise LengthMismatch(f"group {g!r} length differs from target")
        np.add.at(matrix[gi], idx, values)
        total = matrix[gi].sum()
        if total <= 0:
            raise ZeroVariance(f"group {g!r} has zero total importance")
        matrix[gi] /= total
    return BinnedProfile(groups=groups, edges=np.linspace(lo, hi, n_bins + 1),
                         matrix=matrix)


# ---------------------------------------------------------------------------
# skill-type abundance correlations
# ---------------------------------------------------------------------------

def _normalize_name(name: str) -> str:
    return " ".join(name.split()).casefold()


def resolve_skill_groups(corpus: Corpus, grouping) -> dict[str, list[str]]:
    """Map a grouping to skill-id lists.

    Accepts a ClusterAssignment over skills, a mapping of group name to
    skill ids, or a mapping of group name to skill display names (matched
    case- and whitespace-insensitively against skills.csv names).
    """
    from .clustering import ClusterAssignment

    if isinstance(grouping, ClusterAssignment):
        return {c: grouping.members(c) for c in grouping.cluster_ids()}
    known_ids = set(corpus.skills)
    by_name = {_normalize_name(v): k for k, v in corpus.skill_names.items()}
    out: dict[str, list[str]] = {}
    for group, members in grouping.items():
        ids = []
        for m in members:
            if m in known_ids:
                ids.append(m)
            else:
                sid = by_name.get(_normalize_name(m))
                if sid is not None:
                    ids.append(sid)
        out[group] = sorted(set(ids))
    return out


def group_abundance(corpus: Corpus, skill_ids: list[str],
                    weight_by_share: bool = True) -> np.ndarray:
    """Per-city abundance of a skill group.

    Share-weighted by default: sum over occupations of employment share
    times the occupation's total raw importance of the member skills.  With
    ``weight_by_share=False`` occupations present in the city count equally.
    """
    cols = [corpus.skill_index(s) for s in skill_ids]
    imp = corpus.skill_importance[:, cols].sum(axis=1)
    if weight_by_share:
        totals = corpus.employment.sum(axis=1, keepdims=True)
        shares = corpus.employment / totals
        return shares @ imp
    return (corpus.employment > 0) @ imp


def skill_correlation_table(corpus: Corpus, grouping,
                            prob_source: str | None = None,
                            weight_by_share: bool = True
                            ) -> dict[str, dict[str, CorrelationResult]]:
    """Correlate each skill group's abundance with impact, size, and H_skill.

    Returns group -> {"impact": ..., "log10_size": ..., "H_skill": ...}.
    """
    groups = resolve_skill_groups(corpus, grouping)
    table = city_metrics_table(corpus, prob_source)
    impact = np.array([cm.expected_impact for cm in table])
    log_size = np.log10(np.array([cm.size for cm in table]))
    h_skill = np.array([cm.h_skill for cm in table])
    out: dict[str, dict[str, CorrelationResult]] = {}
    for group in sorted(groups):
        if not groups[group]:
            continue
        abundance = group_abundance(corpus, groups[group], weight_by_share)
        out[group] = {
            "impact": pearson(abundance, impact),
            "log10_size": pearson(abundance, log_size),
            "H_skill": pearson(abundance, h_skill),
        }
    return out
