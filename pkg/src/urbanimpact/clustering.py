"""K-means clustering of occupations and skills, PCA projection, z-profiles.

Occupations are clustered on raw skill-importance vectors (no feature
scaling); skills are clustered on the vector of Pearson correlations of
their importance with every other skill across occupations.  Lloyd's
algorithm with k-means++ initialization runs on a seeded generator, so a
given seed is bit-reproducible.  Empty clusters are repaired by moving the
centroid onto the point currently farthest from its own centroid.

Cluster ids are canonical: clusters are relabeled by descending member
count, ties broken by their lexicographically smallest member, which keeps
golden report files stable across platforms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .corpus import Corpus
from .errors import DimsTooLarge, EmptyMatrix, KTooLarge
from .seeding import substream


@dataclass
class FeatureMatrix:
    row_ids: list[str]
    col_ids: list[str]
    values: np.ndarray


@dataclass
class ClusterAssignment:
    k: int
    labels: dict[str, str]            # row_id -> cluster id ("0".."k-1")
    centroids: np.ndarray | None
    inertia: float | None
    seed: int | None
    inertia_history: list[float] = field(default_factory=list)
    degenerate_rows: list[str] = field(default_factory=list)

    def members(self, cluster_id: str) -> list[str]:
        return sorted(r for r, c in self.labels.items() if c == cluster_id)

    def cluster_ids(self) -> list[str]:
        return sorted(set(self.labels.values()), key=int)


def _kmeans_pp_init(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding: subsequent centers drawn with prob ~ D^2."""
    n = x.shape[0]
    centers = np.empty((k, x.shape[1]))
    first = int(rng.integers(n))
    centers[0] = x[first]
    d2 = ((x - centers[0]) ** 2).sum(axis=1)
    for c in range(1, k):
        total = d2.sum()
        if total <= 0:
            # all remaining points coincide with a chosen center
            centers[c] = x[int(rng.integers(n))]
            continue
        probs = d2 / total
        idx = int(rng.choice(n, p=probs))
        centers[c] = x[idx]
        d2 = np.minimum(d2, ((x - centers[c]) ** 2).sum(axis=1))
    return centers


def _assign(x: np.ndarray, centers: np.ndarray):
    d2 = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    labels = d2.argmin(axis=1)
    return labels, d2


def _repair_empty(x, centers, labels, d2):
    """Move each empty cluster's centroid onto the globally farthest point."""
    k = centers.shape[0]
    counts = np.bincount(labels, minlength=k)
    for c in np.flatnonzero(counts == 0):
        dist_own = d2[np.arange(x.shape[0]), labels].copy()
        # points alone in their cluster must stay put
        dist_own[counts[labels] <= 1] = -1.0
        far = int(dist_own.argmax())
        counts[labels[far]] -= 1
        labels[far] = c
        counts[c] = 1
        centers[c] = x[far]
    return centers, labels


def kmeans(matrix: FeatureMatrix, k: int, seed: int = 42, max_iters: int = 300,
           tol: float = 1e-8) -> ClusterAssignment:
    """Lloyd's algorithm with k-means++ initialization.

    Stops when the largest centroid movement drops below ``tol`` or after
    ``max_iters`` iterations.  Inertia (total squared distance to assigned
    centroids) is recorded after every assignment step and never increases.
    """
    x = np.asarray(matrix.values, dtype=float)
    if x.size == 0 or x.shape[0] == 0:
        raise EmptyMatrix("feature matrix has no rows")
    if k < 1 or k > x.shape[0]:
        raise KTooLarge(f"k={k} outside [1, {x.shape[0]} rows]")
    rng = substream(seed)
    centers = _kmeans_pp_init(x, k, rng)

    history = []
    labels = None
    for _ in range(max_iters):
        labels, d2 = _assign(x, centers)
        centers, labels = _repair_empty(x, centers, labels, d2)
        inertia = float(((x - centers[labels]) ** 2).sum())
        history.append(inertia)
        new_centers = np.empty_like(centers)
        for c in range(k):
            new_centers[c] = x[labels == c].mean(axis=0)
        movement = np.sqrt(((new_centers - centers) ** 2).sum(axis=1)).max()
        centers = new_centers
        if movement < tol:
            break
    labels, d2 = _assign(x, centers)
    centers, labels = _repair_empty(x, centers, labels, d2)
    inertia = float(((x - centers[labels]) ** 2).sum())
    history.append(inertia)

    order = _canonical_order(matrix.row_ids, labels, k)
    relabel = {old: new for new, old in enumerate(order)}
    labels = np.array([relabel[c] for c in labels])
    centers = centers[order]
    return ClusterAssignment(
        k=k,
        labels={rid: str(labels[i]) for i, rid in enumerate(matrix.row_ids)},
        centroids=centers,
        inertia=inertia,
        seed=seed,
        inertia_history=history,
    )


def _canonical_order(row_ids, labels, k):
    """Cluster order: descending size, ties by lexicographically smallest member."""
    stats = []
    for c in range(k):
        members = [row_ids[i] for i in np.flatnonzero(labels == c)]
        stats.append((-len(members), min(members), c))
    return [c for _, _, c in sorted(stats)]


def job_feature_matrix(corpus: Corpus, occupations: list[str] | None = None) -> FeatureMatrix:
    """Occupation x skill matrix of raw importances (skill-covered rows only)."""
    uncovered = set(corpus.skill_uncovered)
    if occupations is None:
        occupations = [o for o in corpus.occupations if o not in uncovered]
    rows = [corpus.occ_index(o) for o in occupations]
    return FeatureMatrix(row_ids=list(occupations), col_ids=list(corpus.skills),
                         values=corpus.skill_importance[rows])


def job_clusters(corpus: Corpus, k: int = 5, seed: int = 42,
                 occupations: list[str] | None = None, max_iters: int = 300,
                 tol: float = 1e-8) -> ClusterAssignment:
    """Cluster occupations by raw skill vectors (default k=5; 3-7 sensible)."""
    return kmeans(job_feature_matrix(corpus, occupations), k=k, seed=seed,
                  max_iters=max_iters, tol=tol)


def skill_feature_matrix(corpus: Corpus) -> FeatureMatrix:
    """Skill x skill matrix of cross-occupation importance correlations.

    Skills whose importance never varies across occupations have no defined
    correlation; their feature row is set to zero (placing them at the
    origin) and they are flagged as degenerate.
    """
    imp = corpus.skill_importance
    std = imp.std(axis=0)
    degenerate = std <= 0
    safe_std = np.where(degenerate, 1.0, std)
    z = (imp - imp.mean(axis=0)) / safe_std
    corr = (z.T @ z) / imp.shape[0]
    corr[degenerate, :] = 0.0
    corr[:, degenerate] = 0.0
    return FeatureMatrix(row_ids=list(corpus.skills), col_ids=list(corpus.skills),
                         values=corr)


def skill_clusters(corpus: Corpus, k: int = 10, seed: int = 42,
                   max_iters: int = 300, tol: float = 1e-8) -> ClusterAssignment:
    """Cluster skills by correlation features (default k=10)."""
    matrix = skill_feature_matrix(corpus)
    std = corpus.skill_importance.std(axis=0)
    assignment = kmeans(matrix, k=k, seed=seed, max_iters=max_iters, tol=tol)
    assignment.degenerate_rows = [s for s, flat in zip(corpus.skills, std <= 0) if flat]
    return assignment


def pca_project(matrix: FeatureMatrix, dims: int = 2) -> np.ndarray:
    """Project rows onto the top principal axes of the column-centered data.

    Axes are ordered by descending eigenvalue of the covariance of the
    centered data; each axis is oriented so its largest-magnitude loading is
    positive.  Returns an (n_rows, dims) coordinate array.
    """
    x = np.asarray(matrix.values, dtype=float)
    if dims > min(x.shape):
        raise DimsTooLarge(f"dims={dims} exceeds min(rows, cols)={min(x.shape)}")
    centered = x - x.mean(axis=0)
    u, s, vt = np.linalg.svd(centered, full_matrices=False)
    for axis in range(dims):
        loading = vt[axis]
        if loading[np.abs(loading).argmax()] < 0:
            vt[axis] = -loading
            u[:, axis] = -u[:, axis]
    return u[:, :dims] * s[:dims]


@dataclass
class ZScoreProfile:
    skill_types: list[str]
    job_clusters: list[str]
    z: np.ndarray                     # (n_skill_types, n_job_clusters)
    totals: np.ndarray
    degenerate: list[str] = field(default_factory=list)


def skill_zscore_profile(corpus: Corpus, job_assignment: ClusterAssignment,
                         skill_assignment: ClusterAssignment) -> ZScoreProfile:
    """How strongly each skill type loads on each job cluster.

    Importance of (skill type t, job cluster c) is the sum of raw importance
    over skills in t and occupations in c; each type's row is z-scored
    across job clusters with population mean/std.  Rows with zero variance
    are flagged degenerate and left at z = 0.
    """
    job_ids = job_assignment.cluster_ids()
    type_ids = skill_assignment.cluster_ids()
    occ_of = {c: [corpus.occ_index(o) for o in job_assignment.members(c)]
              for c in job_ids}
    skill_of = {t: [corpus.skill_index(s) for s in skill_assignment.members(t)]
                for t in type_ids}

    totals = np.zeros((len(type_ids), len(job_ids)))
    for ti, t in enumerate(type_ids):
        block = corpus.skill_importance[:, skill_of[t]]
        for ci, c in enumerate(job_ids):
            totals[ti, ci] = block[occ_of[c]].sum()

    z = np.zeros_like(totals)
    degenerate = []
    for ti, t in enumerate(type_ids):
        row = totals[ti]
        std = row.std()
        if std <= 0:
            degenerate.append(t)
            continue
        z[ti] = (row - row.mean()) / std
    return ZScoreProfile(skill_types=type_ids, job_clusters=job_ids, z=z,
                         totals=totals, degenerate=degenerate)
