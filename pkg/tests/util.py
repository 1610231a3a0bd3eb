"""Shared fixture builders and independent oracles for the test suite.

Oracles here deliberately avoid the library's code paths: entropy and Theil
are expanded term by term with math.log, OLS is solved by explicit normal
equations, and k-means inertia is checked against exhaustive partitioning.
"""

from __future__ import annotations

import math

import numpy as np

from urbanimpact.corpus import Corpus, Covariates, _coverage


# ---------------------------------------------------------------------------
# corpus builders
# ---------------------------------------------------------------------------

def build_corpus(employment: dict, skills: dict, probs: dict,
                 covariates: dict | None = None,
                 source: str = "frey_osborne") -> Corpus:
    """Construct a Corpus directly from nested dicts.

    employment: city -> {occ: workers}; skills: occ -> {skill: importance};
    probs: occ -> p_auto.  Mirrors the loader's semantics: axes are sorted,
    matrices dense, occupations outside employment ignored.
    """
    cities = sorted(employment)
    occupations = sorted({o for d in employment.values() for o in d})
    skill_ids = sorted({s for d in skills.values() for s in d})
    occ_pos = {o: i for i, o in enumerate(occupations)}

    emp = np.zeros((len(cities), len(occupations)))
    for i, city in enumerate(cities):
        for occ, w in employment[city].items():
            emp[i, occ_pos[occ]] = w

    imp = np.zeros((len(occupations), len(skill_ids)))
    for occ, d in skills.items():
        if occ not in occ_pos:
            continue
        for s, v in d.items():
            imp[occ_pos[occ], skill_ids.index(s)] = v

    p = np.full(len(occupations), np.nan)
    for occ, v in probs.items():
        if occ in occ_pos:
            p[occ_pos[occ]] = v

    covered = imp.sum(axis=1) > 0
    corpus = Corpus(
        cities=cities,
        occupations=occupations,
        skills=skill_ids,
        city_names={c: c for c in cities},
        skill_names={s: s for s in skill_ids},
        employment=emp,
        skill_importance=imp,
        probs={source: p},
        covariates=covariates or {},
        coverage={},
        skill_uncovered=[o for i, o in enumerate(occupations) if not covered[i]],
    )
    corpus.coverage = {source: _coverage(corpus, p)}
    return corpus


def toy_corpus() -> Corpus:
    """3 cities x 4 occupations x 3 skills, fully covered."""
    return build_corpus(
        employment={
            "ann": {"A": 10, "B": 30},
            "ben": {"B": 5, "C": 5},
            "cam": {"A": 2, "C": 6, "D": 12},
        },
        skills={
            "A": {"s1": 0.9, "s2": 0.3},
            "B": {"s2": 0.5, "s3": 0.5},
            "C": {"s1": 0.2, "s3": 0.8},
            "D": {"s1": 0.4, "s2": 0.4, "s3": 0.4},
        },
        probs={"A": 0.2, "B": 0.8, "C": 0.5, "D": 0.35},
    )


def random_corpus(rng: np.random.Generator, n_cities=6, n_occs=12, n_skills=8,
                  prob_coverage=1.0) -> Corpus:
    """A random fully-valid corpus; every occupation has positive skills."""
    cities = [f"c{i:02d}" for i in range(n_cities)]
    occs = [f"o{j:02d}" for j in range(n_occs)]
    skill_ids = [f"s{k:02d}" for k in range(n_skills)]

    employment = {}
    for city in cities:
        present = rng.random(n_occs) < 0.8
        if not present.any():
            present[rng.integers(n_occs)] = True
        employment[city] = {
            occs[j]: float(rng.integers(1, 500))
            for j in np.flatnonzero(present)
        }

    skills = {}
    for occ in occs:
        n_pos = int(rng.integers(2, n_skills + 1))
        chosen = rng.choice(n_skills, size=n_pos, replace=False)
        skills[occ] = {skill_ids[k]: float(rng.uniform(0.05, 1.0)) for k in chosen}

    n_covered = max(1, int(round(prob_coverage * n_occs)))
    covered = rng.choice(n_occs, size=n_covered, replace=False)
    probs = {occs[j]: float(rng.uniform(0, 1)) for j in covered}
    return build_corpus(employment, skills, probs)


def planted_corpus(seed=7, n_cities=40, betas=(1.4, 1.0, 0.9), occs_per_group=12,
                   n_skills=12, noise_sigma=0.0, p_auto_by_group=None,
                   with_covariates=False, min_count=0.0, weight_alpha=5.0):
    """Corpus with planted scaling exponents and separable skill archetypes.

    City base sizes are log-spaced; the occupation group with exponent
    beta_g carries employment ~ size^beta_g, with the linear group dominating
    totals so the realized x-axis stays close to the base size.  Each group
    has a distinct skill archetype block (clean k-means structure), and
    p_auto can be planted per group so impact correlates with size through
    group composition.

    Returns (corpus, group_of_occ dict, group_names list).
    """
    rng = np.random.default_rng(seed)
    n_groups = len(betas)
    group_names = [f"g{i}b{b:.2f}" for i, b in enumerate(betas)]
    base = np.logspace(3, 6, n_cities)
    t_ref = base.max()

    # the linear group takes 90% of the top city's employment
    amps = np.full(n_groups, 0.1 / max(1, n_groups - 1))
    linear = int(np.argmin(np.abs(np.array(betas) - 1.0)))
    amps[linear] = 0.9

    occs = []
    group_of = {}
    weights = {}
    for g, name in enumerate(group_names):
        w = rng.dirichlet(np.full(occs_per_group, weight_alpha))
        for j in range(occs_per_group):
            occ = f"{name}_o{j:02d}"
            occs.append(occ)
            group_of[occ] = name
            weights[occ] = (g, w[j])

    # min_count drops sub-threshold counts, so small cities lack the rare
    # occupations and the unique-job covariate varies across cities
    employment = {}
    cities = [f"city{i:02d}" for i in range(n_cities)]
    for i, city in enumerate(cities):
        row = {}
        for occ in occs:
            g, w = weights[occ]
            count = float(amps[g] * t_ref * (base[i] / t_ref) ** betas[g] * w)
            if noise_sigma > 0:
                count *= float(np.exp(rng.normal(0.0, noise_sigma)))
            if count >= min_count:
                row[occ] = count
        employment[city] = row

    # block-structured skill archetypes
    block = n_skills // n_groups
    skill_ids = [f"s{k:02d}" for k in range(n_skills)]
    skills = {}
    for occ in occs:
        g, _ = weights[occ]
        vec = {}
        for k, sid in enumerate(skill_ids):
            inside = (k // block) == min(g, n_groups - 1)
            base_v = 0.8 if inside else 0.05
            vec[sid] = float(np.clip(base_v + rng.uniform(-0.02, 0.02), 0.01, 1.0))
        skills[occ] = vec

    if p_auto_by_group is None:
        p_auto_by_group = {name: 0.5 for name in group_names}
    probs = {}
    for occ in occs:
        g, _ = weights[occ]
        jitter = float(rng.uniform(-0.03, 0.03))
        probs[occ] = float(np.clip(p_auto_by_group[group_names[g]] + jitter, 0, 1))

    covariates = None
    if with_covariates:
        covariates = {}
        totals = {city: sum(employment[city].values()) for city in cities}
        for city in cities:
            t = totals[city]
            covariates[city] = Covariates(
                total_employment=t,
                median_income=30000 + 4000 * math.log10(t) + float(rng.normal(0, 500)),
                pct_bachelor=float(np.clip(10 + 4 * math.log10(t)
                                           + float(rng.normal(0, 1)), 0, 100)),
                gdp_per_capita=20000 + 6000 * math.log10(t) + float(rng.normal(0, 800)),
                n_unique_jobs=sum(1 for w in employment[city].values() if w > 0),
            )

    corpus = build_corpus(employment, skills, probs, covariates=covariates)
    return corpus, group_of, group_names


def write_fixture_csvs(tmp_path, employment_rows, skills_rows, probs_rows,
                       covariates_rows=None):
    """Write raw CSV fixtures; rows are already-formatted tuples."""
    def write(name, header, rows):
        path = tmp_path / name
        lines = [",".join(header)] + [",".join(str(v) for v in row) for row in rows]
        path.write_text("\n".join(lines) + "\n")
        return path

    paths = {
        "employment": write("employment.csv",
                            ["city_id", "city_name", "occ_code", "workers"],
                            employment_rows),
        "skills": write("skills.csv",
                        ["occ_code", "skill_id", "skill_name", "importance"],
                        skills_rows),
        "probs": write("probs.csv", ["occ_code", "p_auto"], probs_rows),
    }
    if covariates_rows is not None:
        paths["covariates"] = write(
            "covariates.csv",
            ["city_id", "total_employment", "median_income", "pct_bachelor",
             "gdp_per_capita"],
            covariates_rows)
    return paths


def pipeline_fixture_rows(n_cities=16, n_occs=8, n_skills=5):
    """A deterministic formula-generated fixture big enough for every stage.

    Sizes follow a geometric ladder, occupation presence varies by city so
    the unique-jobs covariate has spread, and all tables are fully covered.
    """
    employment_rows = []
    covariates_rows = []
    for i in range(n_cities):
        size_factor = 10 ** (2 + i / 4)
        total = 0.0
        for j in range(n_occs):
            if (i + j) % 7 == 0 and j > 1:          # rare jobs absent in places
                continue
            count = round(size_factor * (j + 2) / 20 + ((i * (j + 3)) % 5), 3)
            if count <= 0:
                continue
            employment_rows.append((f"city{i:02d}", f"City {i}", f"occ{j}", count))
            total += count
        covariates_rows.append((
            f"city{i:02d}", total,
            30000 + 1500 * i + (i * 7) % 11 * 100,
            20 + i + (i % 3),
            40000 + 2500 * i + (i * 5) % 13 * 150,
        ))

    skills_rows = []
    for j in range(n_occs):
        for k in range(n_skills):
            importance = ((j + k) % n_skills + 1) / (n_skills + 2 + (j % 3))
            skills_rows.append((f"occ{j}", f"sk{k}", f"Skill {k}",
                                round(importance, 6)))

    probs_rows = [(f"occ{j}", round(0.15 + 0.1 * j, 3)) for j in range(n_occs)]
    return employment_rows, skills_rows, probs_rows, covariates_rows


TOY_EMPLOYMENT_ROWS = [
    ("ann", "Ann Arbor", "A", 10),
    ("ann", "Ann Arbor", "B", 30),
    ("ben", "Bend", "B", 5),
    ("ben", "Bend", "C", 5),
    ("cam", "Camden", "A", 2),
    ("cam", "Camden", "C", 6),
    ("cam", "Camden", "D", 12),
]

TOY_SKILLS_ROWS = [
    ("A", "s1", "skill one", 0.9),
    ("A", "s2", "skill two", 0.3),
    ("B", "s2", "skill two", 0.5),
    ("B", "s3", "skill three", 0.5),
    ("C", "s1", "skill one", 0.2),
    ("C", "s3", "skill three", 0.8),
    ("D", "s1", "skill one", 0.4),
    ("D", "s2", "skill two", 0.4),
    ("D", "s3", "skill three", 0.4),
]

TOY_PROBS_ROWS = [("A", 0.2), ("B", 0.8), ("C", 0.5), ("D", 0.35)]

TOY_COVARIATES_ROWS = [
    ("ann", 40, 55000, 42.0, 48000),
    ("ben", 10, 48000, 30.5, 39000),
    ("cam", 20, 43000, 25.0, 35000),
]


# ---------------------------------------------------------------------------
# independent oracles
# ---------------------------------------------------------------------------

def entropy_oracle(probs) -> float:
    """Direct formula: -sum p log p / log K over positive entries."""
    positive = [p for p in probs if p > 0]
    k = len(positive)
    if k <= 1:
        return 0.0
    return -sum(p * math.log(p) for p in positive) / math.log(k)


def theil_oracle(corpus: Corpus, city_id: str) -> float:
    """Term-by-term expansion over skill-covered occupations."""
    i = corpus.cities.index(city_id)
    occ_rows = {}
    for j, occ in enumerate(corpus.occupations):
        total = corpus.skill_importance[j].sum()
        if total > 0 and corpus.employment[i, j] > 0:
            occ_rows[occ] = corpus.skill_importance[j] / total
    denom = sum(corpus.employment[i, corpus.occupations.index(o)] for o in occ_rows)
    shares = {o: corpus.employment[i, corpus.occupations.index(o)] / denom
              for o in occ_rows}
    pms = [sum(shares[o] * occ_rows[o][s] for o in occ_rows)
           for s in range(len(corpus.skills))]
    h_skill = entropy_oracle(pms)
    if h_skill <= 0:
        return 0.0
    total = 0.0
    for occ, pjs in occ_rows.items():
        hj = entropy_oracle(pjs.tolist())
        total += shares[occ] * (h_skill - hj) / h_skill
    return total


def ols_normal_equations(x, y):
    """Brute-force OLS with intercept: coefficients and standard errors."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = x.shape
    a = np.hstack([np.ones((n, 1)), x])
    ata = a.T @ a
    coef = np.linalg.inv(ata) @ a.T @ y
    resid = y - a @ coef
    sigma2 = (resid ** 2).sum() / (n - p - 1)
    stderr = np.sqrt(np.diag(sigma2 * np.linalg.inv(ata)))
    return coef, stderr


def pearson_oracle(x, y) -> float:
    x = list(map(float, x))
    y = list(map(float, y))
    n = len(x)
    mx = sum(x) / n
    my = sum(y) / n
    sxy = sum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = sum((a - mx) ** 2 for a in x)
    syy = sum((b - my) ** 2 for b in y)
    return sxy / math.sqrt(sxx * syy)


def kmeans_exhaustive_inertia(points: np.ndarray, k: int = 2) -> float:
    """Minimum inertia over all k=2 bipartitions (points small)."""
    n = points.shape[0]
    assert k == 2 and n <= 16
    best = math.inf
    for mask in range(1, 2 ** (n - 1)):
        left = [i for i in range(n) if mask & (1 << i)]
        right = [i for i in range(n) if not mask & (1 << i)]
        if not left or not right:
            continue
        inertia = 0.0
        for part in (left, right):
            sub = points[part]
            centroid = sub.mean(axis=0)
            inertia += ((sub - centroid) ** 2).sum()
        best = min(best, inertia)
    return best
