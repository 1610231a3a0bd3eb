"""Decompose the impact difference between two cities by occupation.

Writing E for expected impact and share_m(j) for employment shares, the
difference between cities m and n expands exactly as

    E_m - E_n = sum_j (p_auto(j) - E_n) * (share_m(j) - share_n(j))

because sum_j E_n * (share_m(j) - share_n(j)) = 0.  Each occupation's term
is reported as a percentage of the total difference,

    delta(j) = 100 * (p_auto(j) - E_n) * (share_m(j) - share_n(j)) / (E_m - E_n),

and classified into one of four quadrants: resilient vs susceptible from the
sign of p_auto(j) - E_n (below or above the anchor city's impact), and
increases vs decreases from the sign of delta(j).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .corpus import Corpus
from .errors import UnnormalizedReport, ZeroCoverage
from .metrics import expected_impact

DEGENERATE_EPS = 1e-9
UNASSIGNED = "unassigned"

QUADRANTS = (
    "resilient-increases",
    "resilient-decreases",
    "susceptible-increases",
    "susceptible-decreases",
)


@dataclass
class ShiftRecord:
    occ_code: str
    p_auto: float
    share_m: float
    share_n: float
    raw_term: float
    delta_pct: float | None
    resilience: str               # "resilient" | "susceptible"
    direction: str | None         # "increases" | "decreases" (None if unnormalized)
    cluster_id: str | None = None

    @property
    def quadrant(self) -> str | None:
        if self.direction is None:
            return None
        return f"{self.resilience}-{self.direction}"


@dataclass
class ShiftReport:
    city_m: str
    city_n: str
    e_m: float
    e_n: float
    normalized: bool
    records: list[ShiftRecord]
    excluded: list[str] = field(default_factory=list)
    group_totals: dict[str, float] | None = None
    resilient_total: float | None = None
    susceptible_total: float | None = None


def occupation_shift(corpus: Corpus, city_m: str, city_n: str,
                     prob_source: str | None = None,
                     cluster_assignment: dict[str, str] | None = None) -> ShiftReport:
    """Per-occupation decomposition of E_m - E_n over the union of occupations.

    Occupations without an automation probability are excluded from both
    cities before decomposition (shares renormalized, exclusions listed),
    otherwise the terms would not sum to the impact difference.  When
    |E_m - E_n| < 1e-9 the report is flagged unnormalized: raw terms are
    kept but percentages are unset.
    """
    source = corpus.resolve_prob_source(prob_source)
    p = corpus.prob_vector(source)
    i_m = corpus.city_index(city_m)
    i_n = corpus.city_index(city_n)

    row_m = corpus.employment[i_m]
    row_n = corpus.employment[i_n]
    has_p = ~np.isnan(p)
    in_either = (row_m > 0) | (row_n > 0)
    excluded = [corpus.occupations[j] for j in np.flatnonzero(in_either & ~has_p)]

    def covered_shares(row):
        mask = (row > 0) & has_p
        total = row[mask].sum()
        if total <= 0:
            raise ZeroCoverage("city has no employment covered by probabilities")
        shares = np.zeros_like(row)
        shares[mask] = row[mask] / total
        return shares

    share_m = covered_shares(row_m)
    share_n = covered_shares(row_n)
    e_m = expected_impact(corpus, city_m, source)
    e_n = expected_impact(corpus, city_n, source)

    diff = e_m - e_n
    normalized = abs(diff) >= DEGENERATE_EPS
    union = np.flatnonzero(in_either & has_p)

    records = []
    for j in union:
        occ = corpus.occupations[j]
        raw = (p[j] - e_n) * (share_m[j] - share_n[j])
        delta = 100.0 * raw / diff if normalized else None
        resilience = "susceptible" if p[j] > e_n else "resilient"
        direction = None
        if normalized:
            direction = "increases" if delta > 0 else "decreases"
        records.append(ShiftRecord(
            occ_code=occ,
            p_auto=float(p[j]),
            share_m=float(share_m[j]),
            share_n=float(share_n[j]),
            raw_term=float(raw),
            delta_pct=delta,
            resilience=resilience,
            direction=direction,
            cluster_id=None if cluster_assignment is None
            else cluster_assignment.get(occ, UNASSIGNED),
        ))

    report = ShiftReport(
        city_m=city_m, city_n=city_n, e_m=e_m, e_n=e_n,
        normalized=normalized, records=records, excluded=excluded,
    )
    if normalized:
        report.resilient_total = sum(
            r.delta_pct for r in records if r.resilience == "resilient")
        report.susceptible_total = sum(
            r.delta_pct for r in records if r.resilience == "susceptible")
    if cluster_assignment is not None:
        report.group_totals = group_shift(report, cluster_assignment)
    return report


def group_shift(report: ShiftReport, cluster_assignment: dict[str, str]) -> dict[str, float]:
    """Roll per-occupation contributions up to cluster totals.

    Occupations without a cluster are collected under the reserved key
    ``unassigned``.  Totals are in percent for normalized reports and in raw
    impact units otherwise.
    """
    totals: dict[str, float] = {}
    for rec in report.records:
        group = cluster_assignment.get(rec.occ_code, UNASSIGNED)
        value = rec.delta_pct if report.normalized else rec.raw_term
        totals[group] = totals.get(group, 0.0) + value
    return dict(sorted(totals.items()))


def rank_shift_records(report: ShiftReport, quadrant: str) -> list[ShiftRecord]:
    """Records of one quadrant ordered by |delta| descending, ties by occ_code."""
    if not report.normalized:
        raise UnnormalizedReport(
            "report is flagged degenerate (|E_m - E_n| < 1e-9); quadrants undefined"
        )
    if quadrant not in QUADRANTS:
        raise ValueError(f"quadrant must be one of {QUADRANTS}")
    members = [r for r in report.records if r.quadrant == quadrant]
    return sorted(members, key=lambda r: (-abs(r.delta_pct), r.occ_code))
