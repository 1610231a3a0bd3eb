"""Per-city expected automation impact and labor-specialization measures.

For a city m with worker counts f_m(j):

    share_m(j)   = f_m(j) / sum_j f_m(j)
    E_m          = sum_j p_auto(j) * share_m(j)        (shares renormalized
                   over occupations that carry a probability)
    H_job(m)     = -sum_j share_m(j) * log share_m(j) / log K
    p_j(s)       = importance(j, s) / sum_s importance(j, s)
    H_j          = normalized entropy of p_j(s)
    p_m(s)       = sum_j p_j(s) * share_m(j)
    H_skill(m)   = normalized entropy of p_m(s)
    T_m          = sum_j share_m(j) * (H_skill(m) - H_j) / H_skill(m)

All entropies are normalized by the log of the support size, so the value is
1 for uniform distributions and 0 for a point mass regardless of the number
of categories.  The log base cancels; natural log is used internally.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import Corpus
from .errors import (
    AllZeroSkills,
    EmptyCity,
    NoSkillCoverage,
    ZeroCoverage,
)


@dataclass
class Distribution:
    """A named discrete probability vector.

    ``support_size`` counts strictly positive entries; zero entries are kept
    in ``keys``/``probs`` but contribute nothing to entropy.
    """

    keys: list[str]
    probs: np.ndarray
    support_size: int

    @classmethod
    def from_weights(cls, keys, weights) -> "Distribution":
        weights = np.asarray(weights, dtype=float)
        if (weights < 0).any() or not np.isfinite(weights).all():
            raise ValueError("distribution weights must be finite and non-negative")
        total = weights.sum()
        if total <= 0:
            raise ValueError("distribution weights must have positive sum")
        probs = weights / total
        return cls(keys=list(keys), probs=probs, support_size=int((probs > 0).sum()))


@dataclass
class CityMetrics:
    city_id: str
    size: float
    expected_impact: float
    h_job: float
    h_skill: float
    theil: float
    one_minus_theil: float
    coverage: float
    theil_degenerate: bool = False


def normalized_shannon_entropy(dist: Distribution) -> float:
    """Entropy over non-zero entries divided by log(support size).

    Single-category distributions return 0 (fully specialized): with K = 1
    the normalizer log K vanishes and the measure's specialization limit is
    the meaningful continuation.
    """
    p = dist.probs[dist.probs > 0]
    k = p.size
    if k <= 1:
        return 0.0
    return float(-(p * np.log(p)).sum() / np.log(k))


def employment_share(corpus: Corpus, city_id: str) -> Distribution:
    """share_m(j) over the city's occupations with positive employment."""
    i = corpus.city_index(city_id)
    row = corpus.employment[i]
    mask = row > 0
    if not mask.any():
        raise EmptyCity(f"city {city_id!r} has no positive employment")
    keys = [corpus.occupations[j] for j in np.flatnonzero(mask)]
    return Distribution.from_weights(keys, row[mask])


def expected_impact(corpus: Corpus, city_id: str, prob_source: str | None = None) -> float:
    """Employment-share-weighted mean automation probability for one city.

    Occupations without a probability are excluded and the remaining shares
    renormalized, keeping the result a proper expectation on [0, 1].
    """
    i = corpus.city_index(city_id)
    p = corpus.prob_vector(prob_source)
    row = corpus.employment[i]
    mask = (row > 0) & ~np.isnan(p)
    covered = row[mask].sum()
    if covered <= 0:
        raise ZeroCoverage(
            f"city {city_id!r} has no employment covered by automation probabilities"
        )
    return float((p[mask] * row[mask]).sum() / covered)


def _occ_skill_distributions(corpus: Corpus):
    """(n_occ, n_skill) matrix of p_j(s) plus per-occupation entropy H_j.

    Rows for occupations without positive skill importance are zero and
    their H_j is NaN.  Cached on the corpus: it only depends on the skill
    matrix, which is immutable.
    """
    cached = getattr(corpus, "_skill_dist_cache", None)
    if cached is not None:
        return cached
    imp = corpus.skill_importance
    totals = imp.sum(axis=1, keepdims=True)
    covered = totals[:, 0] > 0
    pjs = np.zeros_like(imp)
    np.divide(imp, totals, out=pjs, where=totals > 0)
    hj = np.full(imp.shape[0], np.nan)
    for j in np.flatnonzero(covered):
        p = pjs[j][pjs[j] > 0]
        hj[j] = 0.0 if p.size <= 1 else float(-(p * np.log(p)).sum() / np.log(p.size))
    corpus._skill_dist_cache = (pjs, hj, covered)
    return corpus._skill_dist_cache


def job_skill_entropy(corpus: Corpus, occ_code: str):
    """Return (p_j(s) over the occupation's skills, H_j)."""
    j = corpus.occ_index(occ_code)
    imp = corpus.skill_importance[j]
    mask = imp > 0
    if not mask.any():
        raise AllZeroSkills(f"occupation {occ_code!r} has no positive skill importance")
    keys = [corpus.skills[s] for s in np.flatnonzero(mask)]
    dist = Distribution.from_weights(keys, imp[mask])
    return dist, normalized_shannon_entropy(dist)


def _skill_covered_shares(corpus: Corpus, i: int) -> np.ndarray:
    """Employment shares renormalized over skill-covered occupations."""
    _, _, covered = _occ_skill_distributions(corpus)
    row = corpus.employment[i]
    mask = (row > 0) & covered
    total = row[mask].sum()
    if total <= 0:
        raise NoSkillCoverage(
            f"city {corpus.cities[i]!r} has no employment with skill coverage"
        )
    shares = np.zeros_like(row)
    shares[mask] = row[mask] / total
    return shares


def city_skill_distribution(corpus: Corpus, city_id: str) -> Distribution:
    """p_m(s): the skill mixture of the city's employment.

    Occupations lacking skill rows are excluded with renormalization (they
    are already reported in corpus.skill_uncovered).
    """
    i = corpus.city_index(city_id)
    pjs, _, _ = _occ_skill_distributions(corpus)
    shares = _skill_covered_shares(corpus, i)
    pms = shares @ pjs
    mask = pms > 0
    keys = [corpus.skills[s] for s in np.flatnonzero(mask)]
    return Distribution(keys=keys, probs=pms[mask],
                        support_size=int(mask.sum()))


def theil(corpus: Corpus, city_id: str) -> float:
    """Theil entropy T_m comparing job-level to city-level skill entropy.

    Returns 0 for the degenerate case H_skill(m) = 0 (city aggregate already
    a point mass); use ``theil_flagged`` to observe the flag.
    """
    return theil_flagged(corpus, city_id)[0]


def theil_flagged(corpus: Corpus, city_id: str):
    i = corpus.city_index(city_id)
    _, hj, _ = _occ_skill_distributions(corpus)
    shares = _skill_covered_shares(corpus, i)
    h_skill = normalized_shannon_entropy(city_skill_distribution(corpus, city_id))
    if h_skill <= 0:
        return 0.0, True
    mask = shares > 0
    t = float((shares[mask] * (h_skill - hj[mask])).sum() / h_skill)
    return t, False


def city_metrics_table(corpus: Corpus, prob_source: str | None = None) -> list[CityMetrics]:
    """All per-city metrics in one pass, in deterministic city order."""
    source = corpus.resolve_prob_source(prob_source)
    coverage = corpus.coverage[source]
    sizes = corpus.city_sizes()
    out = []
    for i, city in enumerate(corpus.cities):
        e = expected_impact(corpus, city, source)
        h_job = normalized_shannon_entropy(employment_share(corpus, city))
        h_skill = normalized_shannon_entropy(city_skill_distribution(corpus, city))
        t, degenerate = theil_flagged(corpus, city)
        out.append(CityMetrics(
            city_id=city,
            size=float(sizes[i]),
            expected_impact=e,
            h_job=h_job,
            h_skill=h_skill,
            theil=t,
            one_minus_theil=1.0 - t,
            coverage=float(coverage[i]),
            theil_degenerate=degenerate,
        ))
    return out
