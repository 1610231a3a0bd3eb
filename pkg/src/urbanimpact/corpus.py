"""Ingest, join, and validate the four input tables into an analytical corpus.

Input files are UTF-8 CSV with a header row:

    employment.csv: city_id,city_name,occ_code,workers
    skills.csv:     occ_code,skill_id,skill_name,importance
    probs.csv:      occ_code,p_auto
    covariates.csv: city_id,total_employment,median_income,pct_bachelor,gdp_per_capita

Internally everything is held as dense numpy matrices indexed by sorted key
lists, which keeps every downstream computation deterministic.  A Corpus is
immutable after load; operations that "modify" it return a new instance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
import pandas as pd

from .errors import (
    DuplicateKey,
    EmptyTable,
    KOutOfRange,
    MissingColumn,
    UnknownCity,
    UnknownProbSource,
    ValueOutOfRange,
)

PROB_SOURCES = ("frey_osborne", "oecd", "custom")


@dataclass
class Covariates:
    """Per-city covariate row; n_unique_jobs is derived from employment."""

    total_employment: float
    median_income: float
    pct_bachelor: float
    gdp_per_capita: float
    n_unique_jobs: int = 0


@dataclass
class Corpus:
    """Joined view of employment, skills, automation probabilities, covariates.

    Attributes
    ----------
    cities, occupations, skills:
        Sorted, duplicate-free key lists defining matrix axes.
    employment:
        (n_cities, n_occupations) worker counts; 0 where a pair is absent.
    skill_importance:
        (n_occupations, n_skills) raw importances in [0, 1]; 0 where absent.
    probs:
        source tag -> (n_occupations,) array of p_auto, NaN where missing.
    coverage:
        source tag -> (n_cities,) fraction of each city's employment whose
        occupation carries a probability under that source.
    skill_uncovered:
        occupations present in employment with no positive skill importance.
    diagnostics:
        row-level messages for rows rejected while parsing.
    """

    cities: list[str]
    occupations: list[str]
    skills: list[str]
    city_names: dict[str, str]
    skill_names: dict[str, str]
    employment: np.ndarray
    skill_importance: np.ndarray
    probs: dict[str, np.ndarray]
    covariates: dict[str, Covariates]
    coverage: dict[str, np.ndarray]
    skill_uncovered: list[str]
    diagnostics: list[str] = field(default_factory=list)

    # -- index helpers ----------------------------------------------------

    def city_index(self, city_id: str) -> int:
        try:
            return self._city_pos[city_id]
        except KeyError:
            raise UnknownCity(f"unknown city_id: {city_id!r}") from None

    def occ_index(self, occ_code: str) -> int:
        try:
            return self._occ_pos[occ_code]
        except KeyError:
            from .errors import UnknownOccupation

            raise UnknownOccupation(f"unknown occ_code: {occ_code!r}") from None

    def skill_index(self, skill_id: str) -> int:
        try:
            return self._skill_pos[skill_id]
        except KeyError:
            raise KeyError(f"unknown skill_id: {skill_id!r}") from None

    def __post_init__(self):
        self._city_pos = {c: i for i, c in enumerate(self.cities)}
        self._occ_pos = {o: i for i, o in enumerate(self.occupations)}
        self._skill_pos = {s: i for i, s in enumerate(self.skills)}

    # -- derived quantities -------------------------------------------------

    def city_sizes(self) -> np.ndarray:
        """Total employment per city (row sums of the employment matrix)."""
        return self.employment.sum(axis=1)

    def prob_vector(self, prob_source: str | None = None) -> np.ndarray:
        """p_auto per occupation (NaN = missing) for the requested source."""
        return self.probs[self.resolve_prob_source(prob_source)]

    def resolve_prob_source(self, prob_source: str | None = None) -> str:
        if prob_source is None:
            if len(self.probs) == 1:
                return next(iter(self.probs))
            raise UnknownProbSource(
                f"prob_source must be one of {sorted(self.probs)}"
            )
        if prob_source not in self.probs:
            raise UnknownProbSource(
                f"prob_source {prob_source!r} not loaded; have {sorted(self.probs)}"
            )
        return prob_source

    def n_unique_jobs(self) -> np.ndarray:
        """Number of occupations with positive employment per city."""
        return (self.employment > 0).sum(axis=1)


def _read_table(path, required, label):
    try:
        df = pd.read_csv(path, dtype=str, keep_default_na=False)
    except pd.errors.EmptyDataError:
        raise EmptyTable(f"{label}: file has no header or content: {path}") from None
    missing = [c for c in required if c not in df.columns]
    if missing:
        raise MissingColumn(f"{label}: missing column(s) {missing} in {path}")
    if len(df) == 0:
        raise EmptyTable(f"{label}: no data rows in {path}")
    return df


def _parse_numeric(df, col, label, diagnostics):
    """Parse one column as float, dropping unparseable rows with diagnostics.

    Non-finite values (inf, nan spelled out in the file) count as
    unparseable: they would silently poison sums downstream.
    """
    values = pd.to_numeric(df[col], errors="coerce")
    bad = (values.isna() | ~np.isfinite(values.fillna(0.0))) \
        & (df[col].str.strip() != "")
    empty = df[col].str.strip() == ""
    reject = bad | empty
    for idx in df.index[reject]:
        diagnostics.append(
            f"{label}: row {idx + 1}: unparseable {col}={df[col][idx]!r}, row rejected"
        )
    return values, reject


def _check_range(values, rows, lo, hi, field_name, label):
    arr = values.to_numpy(dtype=float)
    out = (arr < lo) | (arr > hi) if hi is not None else (arr < lo)
    if out.any():
        i = int(np.argmax(out))
        raise ValueOutOfRange(
            f"{label}: row {rows[i] + 1}: {field_name}={arr[i]} outside "
            f"[{lo}, {hi if hi is not None else 'inf'}]",
            row=int(rows[i] + 1),
            field=field_name,
        )


def load_corpus(employment_path, skills_path, probs_path, covariates_path=None,
                prob_source: str = "frey_osborne") -> Corpus:
    """Load and validate the input tables into a Corpus.

    Rows with unparseable numerics are rejected with row-level diagnostics;
    values violating range invariants raise ValueOutOfRange.  Occupations
    present in employment but absent from the skill matrix (or having only
    zero importances) are listed in ``skill_uncovered``.
    """
    diagnostics: list[str] = []

    emp = _read_table(employment_path, ["city_id", "city_name", "occ_code", "workers"],
                      "employment")
    workers, reject = _parse_numeric(emp, "workers", "employment", diagnostics)
    emp = emp[~reject]
    workers = workers[~reject]
    if len(emp) == 0:
        raise EmptyTable("employment: all rows rejected")
    _check_range(workers, emp.index.to_numpy(), 0.0, None, "workers", "employment")
    dup = emp.duplicated(subset=["city_id", "occ_code"])
    if dup.any():
        row = emp[dup].iloc[0]
        raise DuplicateKey(
            f"employment: duplicate (city_id, occ_code)=({row.city_id!r}, {row.occ_code!r})"
        )

    skl = _read_table(skills_path, ["occ_code", "skill_id", "skill_name", "importance"],
                      "skills")
    importance, reject = _parse_numeric(skl, "importance", "skills", diagnostics)
    skl = skl[~reject]
    importance = importance[~reject]
    if len(skl) == 0:
        raise EmptyTable("skills: all rows rejected")
    _check_range(importance, skl.index.to_numpy(), 0.0, 1.0, "importance", "skills")
    dup = skl.duplicated(subset=["occ_code", "skill_id"])
    if dup.any():
        row = skl[dup].iloc[0]
        raise DuplicateKey(
            f"skills: duplicate (occ_code, skill_id)=({row.occ_code!r}, {row.skill_id!r})"
        )

    prb = _read_table(probs_path, ["occ_code", "p_auto"], "probs")
    p_auto, reject = _parse_numeric(prb, "p_auto", "probs", diagnostics)
    prb = prb[~reject]
    p_auto = p_auto[~reject]
    if len(prb) == 0:
        raise EmptyTable("probs: all rows rejected")
    _check_range(p_auto, prb.index.to_numpy(), 0.0, 1.0, "p_auto", "probs")
    if prb["occ_code"].duplicated().any():
        code = prb["occ_code"][prb["occ_code"].duplicated()].iloc[0]
        raise DuplicateKey(f"probs: duplicate occ_code {code!r}")
    if prob_source is None:
        prob_source = "custom"

    # cities with no positive counts are not retained
    positive_by_city = emp.assign(_w=workers.to_numpy(dtype=float)) \
        .groupby("city_id")["_w"].max()
    empty_cities = set(positive_by_city.index[positive_by_city <= 0])
    if empty_cities:
        for c in sorted(empty_cities):
            diagnostics.append(
                f"employment: city {c!r} has no positive worker counts, dropped")
        retained = ~emp["city_id"].isin(empty_cities)
        emp = emp[retained]
        workers = workers[retained]
        if len(emp) == 0:
            raise EmptyTable("employment: no city has positive worker counts")

    # axes: sorted, duplicate-free
    cities = sorted(emp["city_id"].unique())
    occupations = sorted(emp["occ_code"].unique())
    skills = sorted(skl["skill_id"].unique())
    city_pos = {c: i for i, c in enumerate(cities)}
    occ_pos = {o: i for i, o in enumerate(occupations)}
    skill_pos = {s: i for i, s in enumerate(skills)}

    city_names = {}
    for cid, name in zip(emp["city_id"], emp["city_name"]):
        city_names.setdefault(cid, name)
    skill_names = {}
    for sid, name in zip(skl["skill_id"], skl["skill_name"]):
        skill_names.setdefault(sid, name)

    employment = np.zeros((len(cities), len(occupations)))
    employment[
        emp["city_id"].map(city_pos).to_numpy(),
        emp["occ_code"].map(occ_pos).to_numpy(),
    ] = workers.to_numpy(dtype=float)

    skill_importance = np.zeros((len(occupations), len(skills)))
    known = skl["occ_code"].isin(occ_pos).to_numpy()
    for code in skl["occ_code"][~known].unique():
        diagnostics.append(f"skills: occ_code {code!r} absent from employment, ignored")
    skl_k = skl[known]
    skill_importance[
        skl_k["occ_code"].map(occ_pos).to_numpy(),
        skl_k["skill_id"].map(skill_pos).to_numpy(),
    ] = importance[known].to_numpy(dtype=float)
    covered = skill_importance.sum(axis=1) > 0
    skill_uncovered = [o for i, o in enumerate(occupations) if not covered[i]]
    for code in skill_uncovered:
        diagnostics.append(f"skills: occupation {code!r} has no positive importance")

    probs = np.full(len(occupations), np.nan)
    known = prb["occ_code"].isin(occ_pos).to_numpy()
    for code in prb["occ_code"][~known].unique():
        diagnostics.append(f"probs: occ_code {code!r} absent from employment, ignored")
    prb_k = prb[known]
    probs[prb_k["occ_code"].map(occ_pos).to_numpy()] = p_auto[known].to_numpy(dtype=float)

    covariates: dict[str, Covariates] = {}
    if covariates_path is not None:
        cov = _read_table(
            covariates_path,
            ["city_id", "total_employment", "median_income", "pct_bachelor",
             "gdp_per_capita"],
            "covariates",
        )
        parsed = {}
        reject_any = pd.Series(False, index=cov.index)
        for col in ["total_employment", "median_income", "pct_bachelor", "gdp_per_capita"]:
            parsed[col], rej = _parse_numeric(cov, col, "covariates", diagnostics)
            reject_any |= rej
        cov = cov[~reject_any]
        if cov["city_id"].duplicated().any():
            cid = cov["city_id"][cov["city_id"].duplicated()].iloc[0]
            raise DuplicateKey(f"covariates: duplicate city_id {cid!r}")
        totals = parsed["total_employment"][~reject_any]
        nonpos = totals.to_numpy(dtype=float) <= 0
        if nonpos.any():
            bad_row = int(cov.index.to_numpy()[np.argmax(nonpos)]) + 1
            raise ValueOutOfRange(
                f"covariates: row {bad_row}: total_employment must be > 0",
                row=bad_row, field="total_employment")
        _check_range(parsed["pct_bachelor"][~reject_any], cov.index.to_numpy(),
                     0.0, 100.0, "pct_bachelor", "covariates")
        for idx, cid in zip(cov.index, cov["city_id"]):
            if cid not in city_pos:
                diagnostics.append(
                    f"covariates: city_id {cid!r} absent from employment, ignored"
                )
                continue
            covariates[cid] = Covariates(
                total_employment=float(parsed["total_employment"][idx]),
                median_income=float(parsed["median_income"][idx]),
                pct_bachelor=float(parsed["pct_bachelor"][idx]),
                gdp_per_capita=float(parsed["gdp_per_capita"][idx]),
                n_unique_jobs=int((employment[city_pos[cid]] > 0).sum()),
            )

    corpus = Corpus(
        cities=cities,
        occupations=occupations,
        skills=skills,
        city_names=city_names,
        skill_names=skill_names,
        employment=employment,
        skill_importance=skill_importance,
        probs={prob_source: probs},
        covariates=covariates,
        coverage={},
        skill_uncovered=skill_uncovered,
        diagnostics=diagnostics,
    )
    corpus.coverage = {prob_source: _coverage(corpus, probs)}
    return corpus


def _coverage(corpus: Corpus, probs: np.ndarray) -> np.ndarray:
    """Fraction of each city's employment whose occupation has a p_auto."""
    has_p = ~np.isnan(probs)
    totals = corpus.employment.sum(axis=1)
    covered = corpus.employment[:, has_p].sum(axis=1)
    return covered / totals


def add_prob_source(corpus: Corpus, probs_path, prob_source: str) -> Corpus:
    """Return a corpus with an additional automation-probability table."""
    prb = _read_table(probs_path, ["occ_code", "p_auto"], "probs")
    diagnostics = list(corpus.diagnostics)
    p_auto, reject = _parse_numeric(prb, "p_auto", "probs", diagnostics)
    prb = prb[~reject]
    _check_range(p_auto, prb.index.to_numpy(), 0.0, 1.0, "p_auto", "probs")
    probs = np.full(len(corpus.occupations), np.nan)
    pos = {o: i for i, o in enumerate(corpus.occupations)}
    for code, p in zip(prb["occ_code"], p_auto):
        if code in pos:
            probs[pos[code]] = float(p)
    new_probs = dict(corpus.probs)
    new_probs[prob_source] = probs
    new_cov = dict(corpus.coverage)
    out = replace(corpus, probs=new_probs, coverage=new_cov, diagnostics=diagnostics)
    out.coverage[prob_source] = _coverage(out, probs)
    return out


def aggregate_cities(corpus: Corpus, city_ids: list[str], label: str) -> Corpus:
    """Return a corpus extended with a pseudo-city summing the given cities.

    The pseudo-city's employment row is the element-wise sum of the member
    rows.  Covariates are summed where additive (total employment) and
    omitted otherwise, so pseudo-cities never enter regression samples.
    """
    if not city_ids:
        raise UnknownCity("aggregate_cities: empty city_ids")
    idx = [corpus.city_index(c) for c in city_ids]
    if label in corpus._city_pos:
        raise DuplicateKey(f"aggregate label {label!r} collides with an existing city")
    row = corpus.employment[idx].sum(axis=0)

    cities = sorted(corpus.cities + [label])
    order = [corpus._city_pos[c] if c != label else -1 for c in cities]
    employment = np.empty((len(cities), len(corpus.occupations)))
    for i, src in enumerate(order):
        employment[i] = row if src == -1 else corpus.employment[src]

    city_names = dict(corpus.city_names)
    city_names[label] = label
    covariates = dict(corpus.covariates)
    covariates[label] = Covariates(
        total_employment=float(row.sum()),
        median_income=math.nan,
        pct_bachelor=math.nan,
        gdp_per_capita=math.nan,
        n_unique_jobs=int((row > 0).sum()),
    )

    out = replace(corpus, cities=cities, city_names=city_names,
                  employment=employment, covariates=covariates, coverage={})
    out.__post_init__()
    out.coverage = {src: _coverage(out, p) for src, p in out.probs.items()}
    return out


def select_extreme_cities(corpus: Corpus, k: int, by_size_ascending: bool = False) -> list[str]:
    """Return k city_ids ranked by total employment.

    ``by_size_ascending=True`` selects the smallest cities.  Ties are broken
    by lexicographic city_id.
    """
    if not 1 <= k <= len(corpus.cities):
        raise KOutOfRange(f"k={k} outside [1, {len(corpus.cities)}]")
    sizes = corpus.city_sizes()
    ranked = sorted(
        zip(sizes, corpus.cities),
        key=lambda t: (t[0], t[1]) if by_size_ascending else (-t[0], t[1]),
    )
    return [c for _, c in ranked[:k]]


def load_cluster_csv(path, corpus: Corpus) -> dict[str, str]:
    """Read an externally computed occupation clustering (occ_code,cluster_id)."""
    df = _read_table(path, ["occ_code", "cluster_id"], "clusters")
    if df["occ_code"].duplicated().any():
        code = df["occ_code"][df["occ_code"].duplicated()].iloc[0]
        raise DuplicateKey(f"clusters: duplicate occ_code {code!r}")
    known = set(corpus.occupations)
    return {o: c for o, c in zip(df["occ_code"], df["cluster_id"]) if o in known}


def write_corpus(corpus: Corpus, out_dir, prob_source: str | None = None) -> dict[str, str]:
    """Write the corpus back to its four CSV files (canonical order).

    Only positive employment counts and positive skill importances are
    emitted.  Floats use repr precision so a reload round-trips exactly.
    """
    from pathlib import Path

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    files = {}

    rows = []
    for i, city in enumerate(corpus.cities):
        for j, occ in enumerate(corpus.occupations):
            w = corpus.employment[i, j]
            if w > 0:
                rows.append((city, corpus.city_names.get(city, city), occ, repr(float(w))))
    path = out_dir / "employment.csv"
    pd.DataFrame(rows, columns=["city_id", "city_name", "occ_code", "workers"]).to_csv(
        path, index=False)
    files["employment"] = str(path)

    rows = []
    for j, occ in enumerate(corpus.occupations):
        for s, skill in enumerate(corpus.skills):
            v = corpus.skill_importance[j, s]
            if v > 0:
                rows.append((occ, skill, corpus.skill_names.get(skill, skill),
                             repr(float(v))))
    path = out_dir / "skills.csv"
    pd.DataFrame(rows, columns=["occ_code", "skill_id", "skill_name", "importance"]).to_csv(
        path, index=False)
    files["skills"] = str(path)

    source = corpus.resolve_prob_source(prob_source)
    probs = corpus.probs[source]
    rows = [(occ, repr(float(probs[j])))
            for j, occ in enumerate(corpus.occupations) if not np.isnan(probs[j])]
    path = out_dir / "probs.csv"
    pd.DataFrame(rows, columns=["occ_code", "p_auto"]).to_csv(path, index=False)
    files["probs"] = str(path)

    if corpus.covariates:
        rows = []
        for city in corpus.cities:
            cov = corpus.covariates.get(city)
            if cov is None or math.isnan(cov.median_income):
                continue
            rows.append((city, repr(float(cov.total_employment)),
                         repr(float(cov.median_income)),
                         repr(float(cov.pct_bachelor)),
                         repr(float(cov.gdp_per_capita))))
        if rows:
            path = out_dir / "covariates.csv"
            pd.DataFrame(rows, columns=["city_id", "total_employment", "median_income",
                                        "pct_bachelor", "gdp_per_capita"]).to_csv(
                path, index=False)
            files["covariates"] = str(path)

    return files
