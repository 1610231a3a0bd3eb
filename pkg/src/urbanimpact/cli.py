"""Command-line front end.

Every subcommand loads the corpus from the four CSV inputs, runs one stage
of the pipeline, and writes delimited reports (plus SVG figures with
``--plot svg``) under the output directory.  Reruns with the same inputs and
configuration produce byte-identical files.

Exit codes: 0 success, 1 internal invariant violation, 2 input/config error.
"""

from __future__ import annotations

import argparse
import sys
import traceback
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import clustering, figures, metrics, robustness, scaling, shift, stats
from .corpus import (
    Corpus,
    aggregate_cities,
    load_cluster_csv,
    load_corpus,
    select_extreme_cities,
)
from .errors import UrbanImpactError
from .report import table_path, write_json, write_manifest, write_table
from .taskgroups import PREDEFINED_GROUPINGS


@dataclass
class RunConfig:
    employment: str
    skills: str
    probs: str
    covariates: str | None = None
    prob_source: str = "frey_osborne"
    k_jobs: int = 5
    k_skills: int = 10
    seed: int = 42
    trials: int = 500
    out: str = "reports"
    format: str = "csv"
    plot: str = "none"
    threads: int = 1

    @property
    def json_format(self) -> bool:
        return self.format == "json"

    def as_dict(self) -> dict:
        return {
            "employment": self.employment, "skills": self.skills,
            "probs": self.probs, "covariates": self.covariates,
            "prob_source": self.prob_source, "k_jobs": self.k_jobs,
            "k_skills": self.k_skills, "seed": self.seed,
            "trials": self.trials, "format": self.format, "plot": self.plot,
            "threads": self.threads,
        }


def _common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--employment", required=True, help="employment.csv path")
    parser.add_argument("--skills", required=True, help="skills.csv path")
    parser.add_argument("--probs", required=True, help="probs.csv path")
    parser.add_argument("--covariates", default=None, help="covariates.csv path")
    parser.add_argument("--out", default="reports", help="output directory")
    parser.add_argument("--format", choices=["csv", "json"], default="csv")
    parser.add_argument("--plot", choices=["none", "svg"], default="none")
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--prob-source", default="frey_osborne",
                        choices=["frey_osborne", "oecd", "custom"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="urbanimpact",
        description="Automation impact, specialization, and scaling analytics "
                    "over city employment data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text)
        _common_flags(p)
        return p

    add("load-check", "validate inputs and print corpus diagnostics")
    add("impact", "per-city metrics and the size-impact fit")
    add("entropy", "specialization measures against city size")

    p = add("cluster-jobs", "k-means occupations by raw skill vectors")
    p.add_argument("--k-jobs", type=int, default=5)
    p.add_argument("--kmeans-max-iters", type=int, default=300)
    p.add_argument("--kmeans-tol", type=float, default=1e-8)

    p = add("cluster-skills", "k-means skills by cross-occupation correlation")
    p.add_argument("--k-skills", type=int, default=10)
    p.add_argument("--kmeans-max-iters", type=int, default=300)
    p.add_argument("--kmeans-tol", type=float, default=1e-8)

    p = add("scaling", "power-law exponents per job cluster")
    p.add_argument("--k-jobs", type=int, default=5)
    p.add_argument("--clusters", default=None,
                   help="clusters.csv (occ_code,cluster_id) instead of k-means")
    p.add_argument("--normalize-shift", action="store_true",
                   help="shift plot series by fitted intercepts")
    p.add_argument("--per-occupation", action="store_true",
                   help="also write per-occupation exponents")

    p = add("stability", "cluster-rank stability under occupation subsampling")
    p.add_argument("--k-jobs", type=int, default=5)
    p.add_argument("--rates", type=float, nargs="+",
                   default=[0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0])
    p.add_argument("--trials", type=int, default=100)

    p = add("shift", "decompose the impact difference between two cities")
    p.add_argument("city_m", nargs="?", help="first city (higher impact by convention)")
    p.add_argument("city_n", nargs="?", help="second city (the anchor)")
    p.add_argument("--largest", type=int, default=None, metavar="K",
                   help="aggregate the K largest cities as city_n")
    p.add_argument("--smallest", type=int, default=None, metavar="K",
                   help="aggregate the K smallest cities as city_m")
    p.add_argument("--clusters", default=None)
    p.add_argument("--k-jobs", type=int, default=None,
                   help="label records by a k-means job clustering")
    p.add_argument("--top", type=int, default=15, help="bars per quadrant in the plot")

    add("regress", "standardized regression models 1-8")

    p = add("validate-split", "split-half validation of a regression model")
    p.add_argument("--model", default="8", choices=sorted(stats.MODEL_VARIABLES))
    p.add_argument("--trials", type=int, default=1000)

    p = add("correlations", "skill-group abundance vs impact, size, H_skill")
    p.add_argument("--grouping", default="skill-clusters",
                   choices=["skill-clusters", "task-groups", "routineness"])
    p.add_argument("--k-skills", type=int, default=10)
    p.add_argument("--unweighted-abundance", action="store_true",
                   help="count occupations equally instead of weighting by share")

    p = add("profiles", "binned conditional profiles per skill group")
    p.add_argument("--grouping", default="skill-clusters",
                   choices=["skill-clusters", "task-groups", "routineness"])
    p.add_argument("--k-skills", type=int, default=10)
    p.add_argument("--target", default="impact", choices=["impact", "skill-entropy"])
    p.add_argument("--bins", type=int, default=10)
    p.add_argument("--unweighted-abundance", action="store_true")

    p = add("robustness-noise", "impact correlation under p_auto noise")
    p.add_argument("--error", type=float, nargs="+", default=[0.05, 0.1, 0.15])
    p.add_argument("--trials", type=int, default=500)

    p = add("robustness-removal", "impact correlation under occupation removal")
    p.add_argument("--fraction", type=float, nargs="+", default=[0.1, 0.25, 0.5])
    p.add_argument("--trials", type=int, default=500)

    p = add("pipeline", "run every stage and write a manifest")
    p.add_argument("--k-jobs", type=int, default=5)
    p.add_argument("--k-skills", type=int, default=10)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--extreme-k", type=int, default=None,
                   help="aggregate size for the shift stage (default: half the cities, max 50)")
    p.add_argument("--shift-m", default=None, help="override shift city_m")
    p.add_argument("--shift-n", default=None, help="override shift city_n")
    p.add_argument("--errors", type=float, nargs="+", default=[0.05, 0.15])
    p.add_argument("--fractions", type=float, nargs="+", default=[0.1, 0.5])
    p.add_argument("--model", default="8", choices=sorted(stats.MODEL_VARIABLES))

    return parser


def _config(args) -> RunConfig:
    return RunConfig(
        employment=args.employment, skills=args.skills, probs=args.probs,
        covariates=args.covariates, prob_source=args.prob_source,
        k_jobs=getattr(args, "k_jobs", None) or 5,
        k_skills=getattr(args, "k_skills", 10),
        seed=args.seed, trials=getattr(args, "trials", 500), out=args.out,
        format=args.format, plot=args.plot, threads=args.threads,
    )


def _load(config: RunConfig) -> Corpus:
    return load_corpus(config.employment, config.skills, config.probs,
                       config.covariates, prob_source=config.prob_source)


# ---------------------------------------------------------------------------
# stages (each returns the list of files written)
# ---------------------------------------------------------------------------

def run_load_check(corpus: Corpus, config: RunConfig) -> list[Path]:
    coverage = corpus.coverage[config.prob_source]
    print(f"cities: {len(corpus.cities)}")
    print(f"occupations: {len(corpus.occupations)}")
    print(f"skills: {len(corpus.skills)}")
    print(f"skill-uncovered occupations: {len(corpus.skill_uncovered)}")
    print(f"coverage: min={coverage.min():.4f} mean={coverage.mean():.4f}")
    for line in corpus.diagnostics:
        print(f"note: {line}")
    return []


def _metrics_rows(corpus: Corpus, config: RunConfig):
    table = metrics.city_metrics_table(corpus, config.prob_source)
    header = ["city_id", "size", "E", "H_job", "H_skill", "T", "one_minus_T",
              "coverage"]
    rows = [(m.city_id, m.size, m.expected_impact, m.h_job, m.h_skill, m.theil,
             m.one_minus_theil, m.coverage) for m in table]
    degenerate = [m.city_id for m in table if m.theil_degenerate]
    if degenerate:
        print(f"note: Theil degenerate (H_skill = 0) for: "
              f"{', '.join(degenerate)}", file=sys.stderr)
    return table, header, rows


def run_impact(corpus: Corpus, config: RunConfig) -> list[Path]:
    table, header, rows = _metrics_rows(corpus, config)
    out = Path(config.out)
    files = [write_table(table_path(out, "metrics", config.json_format),
                         header, rows, config.json_format)]
    log_size = np.log10([m.size for m in table])
    impact = np.array([m.expected_impact for m in table])
    corr = stats.pearson(log_size, impact)
    slope, intercept = np.polyfit(log_size, impact, 1)
    files.append(write_json(out / "impact_fit.json", {
        "r": corr.r, "p": corr.p, "n": corr.n,
        "slope_per_decade": float(slope),
        "slope_pct_per_decade": float(100 * slope),
        "intercept": float(intercept),
    }))
    if config.plot == "svg":
        path = out / "impact_scatter.svg"
        figures.impact_scatter(path, log_size, impact, slope, intercept,
                               corr.r, corr.p)
        files.append(path)
    return files


def run_entropy(corpus: Corpus, config: RunConfig) -> list[Path]:
    table, header, rows = _metrics_rows(corpus, config)
    out = Path(config.out)
    files = [write_table(table_path(out, "metrics", config.json_format),
                         header, rows, config.json_format)]
    log_size = np.log10([m.size for m in table])
    measures = {
        "H_job": np.array([m.h_job for m in table]),
        "H_skill": np.array([m.h_skill for m in table]),
        "one_minus_T": np.array([m.one_minus_theil for m in table]),
    }
    fits = {}
    for name, values in measures.items():
        corr = stats.pearson(log_size, values)
        slope, intercept = np.polyfit(log_size, values, 1)
        fits[name] = {"r": corr.r, "p": corr.p, "n": corr.n,
                      "slope_per_decade": float(slope),
                      "intercept": float(intercept)}
    files.append(write_json(out / "entropy_fits.json", fits))
    if config.plot == "svg":
        path = out / "entropy_scatter.svg"
        figures.entropy_panels(path, log_size, measures["H_job"],
                               measures["H_skill"], measures["one_minus_T"])
        files.append(path)
    return files


def run_cluster_jobs(corpus: Corpus, config: RunConfig, max_iters=300,
                     tol=1e-8) -> list[Path]:
    out = Path(config.out)
    assignment = clustering.job_clusters(corpus, k=config.k_jobs, seed=config.seed,
                                         max_iters=max_iters, tol=tol)
    matrix = clustering.job_feature_matrix(corpus)
    coords = clustering.pca_project(matrix, dims=2)
    files = [
        write_table(table_path(out, "job_clusters", config.json_format),
                    ["row_id", "cluster_id"],
                    [(rid, assignment.labels[rid]) for rid in matrix.row_ids],
                    config.json_format),
        write_table(out / "job_centroids.csv",
                    ["cluster_id"] + matrix.col_ids,
                    [(str(c), *assignment.centroids[c])
                     for c in range(assignment.k)]),
        write_table(table_path(out, "pca_coords", config.json_format),
                    ["occ_code", "x", "y", "cluster_id"],
                    [(rid, float(coords[i, 0]), float(coords[i, 1]),
                      assignment.labels[rid])
                     for i, rid in enumerate(matrix.row_ids)],
                    config.json_format),
    ]
    if config.plot == "svg":
        path = out / "pca_scatter.svg"
        figures.pca_scatter(path, coords, matrix.row_ids, assignment.labels)
        files.append(path)
    return files


def run_cluster_skills(corpus: Corpus, config: RunConfig, max_iters=300,
                       tol=1e-8) -> list[Path]:
    out = Path(config.out)
    assignment = clustering.skill_clusters(corpus, k=config.k_skills,
                                           seed=config.seed,
                                           max_iters=max_iters, tol=tol)
    files = [
        write_table(table_path(out, "skill_clusters", config.json_format),
                    ["row_id", "cluster_id"],
                    [(s, assignment.labels[s]) for s in corpus.skills],
                    config.json_format),
        write_table(out / "skill_centroids.csv",
                    ["cluster_id"] + corpus.skills,
                    [(str(c), *assignment.centroids[c])
                     for c in range(assignment.k)]),
    ]
    return files


def _job_assignment(corpus: Corpus, config: RunConfig, clusters_path):
    if clusters_path:
        return load_cluster_csv(clusters_path, corpus)
    return clustering.job_clusters(corpus, k=config.k_jobs, seed=config.seed).labels


def run_scaling(corpus: Corpus, config: RunConfig, clusters_path=None,
                normalize_shift=False, per_occupation=False) -> list[Path]:
    out = Path(config.out)
    labels = _job_assignment(corpus, config, clusters_path)
    fits = scaling.cluster_scaling(corpus, labels)
    header = ["cluster_id", "beta", "intercept", "stderr_beta", "r2", "n"]
    rows = [(cid, f.beta, f.intercept, f.stderr_beta, f.r2, f.n)
            for cid, f in fits.items()]
    files = [write_table(table_path(out, "scaling", config.json_format),
                         header, rows, config.json_format)]
    if per_occupation:
        sizes = corpus.city_sizes()
        occ_rows = []
        for j, occ in enumerate(corpus.occupations):
            try:
                f = scaling.fit_power_law(sizes, corpus.employment[:, j], occ)
                occ_rows.append((occ, f.beta, f.intercept, f.stderr_beta, f.r2, f.n))
            except UrbanImpactError:
                occ_rows.append((occ, None, None, None, None, 0))
        files.append(write_table(
            table_path(out, "occupation_scaling", config.json_format),
            ["occ_code", "beta", "intercept", "stderr_beta", "r2", "n"],
            occ_rows, config.json_format))
    if config.plot == "svg":
        series = scaling.loglog_plot_points(corpus, labels, normalize_shift)
        path = out / "scaling_loglog.svg"
        figures.scaling_loglog(path, series, scaling.reference_line(series))
        files.append(path)
    return files


def run_stability(corpus: Corpus, config: RunConfig, rates, trials) -> list[Path]:
    out = Path(config.out)
    results = scaling.scaling_stability(corpus, k=config.k_jobs, rates=rates,
                                        trials=trials, seed=config.seed,
                                        workers=config.threads)
    rows = []
    for res in results:
        for rank, betas in enumerate(res.beta_by_rank):
            for trial, beta in enumerate(betas):
                rows.append((res.subsample_rate, trial, rank, beta))
    return [write_table(table_path(out, "stability", config.json_format),
                        ["rate", "trial", "rank", "beta"], rows,
                        config.json_format)]


def run_shift(corpus: Corpus, config: RunConfig, city_m, city_n,
              largest=None, smallest=None, clusters_path=None, top=15,
              k_jobs=None) -> list[Path]:
    out = Path(config.out)
    if (city_m is None) != (city_n is None):
        raise UrbanImpactError("shift needs both city_m and city_n, "
                               "or --largest/--smallest")
    if city_m is None:
        if largest is None or smallest is None:
            raise UrbanImpactError("shift needs city_m city_n or both "
                                   "--largest K and --smallest K")
        big = select_extreme_cities(corpus, largest, by_size_ascending=False)
        small = select_extreme_cities(corpus, smallest, by_size_ascending=True)
        corpus = aggregate_cities(corpus, big, f"largest-{largest}")
        corpus = aggregate_cities(corpus, small, f"smallest-{smallest}")
        city_m, city_n = f"smallest-{smallest}", f"largest-{largest}"
    if clusters_path:
        labels = load_cluster_csv(clusters_path, corpus)
    elif k_jobs is not None:
        labels = clustering.job_clusters(corpus, k=k_jobs, seed=config.seed).labels
    else:
        labels = None
    report = shift.occupation_shift(corpus, city_m, city_n,
                                    prob_source=config.prob_source,
                                    cluster_assignment=labels)
    header = ["occ_code", "cluster_id", "p_auto", "share_m", "share_n",
              "raw_term", "delta_pct", "resilience", "direction"]
    rows = [(r.occ_code, r.cluster_id, r.p_auto, r.share_m, r.share_n,
             r.raw_term, r.delta_pct, r.resilience, r.direction)
            for r in report.records]
    files = [
        write_table(table_path(out, "shift", config.json_format),
                    header, rows, config.json_format),
        write_json(out / "shift_summary.json", {
            "city_m": report.city_m, "city_n": report.city_n,
            "E_m": report.e_m, "E_n": report.e_n,
            "normalized": report.normalized,
            "group_totals": report.group_totals,
            "resilient_total": report.resilient_total,
            "susceptible_total": report.susceptible_total,
            "excluded": report.excluded,
        }),
    ]
    if not report.normalized:
        print(f"note: degenerate difference |E_m - E_n| < 1e-9 for "
              f"{city_m} vs {city_n}; percentages unset", file=sys.stderr)
    if config.plot == "svg" and report.normalized:
        path = out / "shift_bars.svg"
        figures.shift_bars(path, report, top_n=top)
        files.append(path)
    return files


def run_regress(corpus: Corpus, config: RunConfig, residual_model="8") -> list[Path]:
    out = Path(config.out)
    fits = stats.regression_suite(corpus, config.prob_source)
    variable_order = stats.URBAN_COVARIATES + stats.SPECIALIZATION_COVARIATES
    header = ["variable"] + [f"model_{f.model_id}" for f in fits]
    rows = []
    for var in variable_order:
        coef_row, se_row = [var], [f"{var}_se"]
        for f in fits:
            if var in f.variables:
                i = f.variables.index(var)
                coef_row.append(float(f.coef[i]))
                se_row.append(float(f.stderr[i]))
            else:
                coef_row.append(None)
                se_row.append(None)
        rows.append(tuple(coef_row))
        rows.append(tuple(se_row))
    rows.append(("n", *[f.n for f in fits]))
    rows.append(("p_value", *[f.model_p for f in fits]))
    rows.append(("r2", *[f.r2 for f in fits]))
    rows.append(("adj_r2", *[f.adj_r2 for f in fits]))
    files = [write_table(table_path(out, "regression", config.json_format),
                         header, rows, config.json_format)]

    chosen = next(f for f in fits if f.model_id == residual_model)
    ranking = stats.residual_ranking(chosen)
    files.append(write_table(
        table_path(out, "residuals", config.json_format),
        ["city_id", "residual", "rank"],
        [(cid, res, rank) for cid, res, rank in ranking],
        config.json_format))
    sample = stats.regression_sample(corpus, config.prob_source)
    if sample.dropped:
        print(f"note: {len(sample.dropped)} cities dropped from the regression "
              f"sample (incomplete covariates)", file=sys.stderr)
    return files


def run_validate_split(corpus: Corpus, config: RunConfig, model, trials) -> list[Path]:
    out = Path(config.out)
    result = stats.split_validation(corpus, model_id=model, trials=trials,
                                    seed=config.seed,
                                    prob_source=config.prob_source)
    files = [
        write_table(table_path(out, "validation", config.json_format),
                    ["trial", "r2"],
                    [(t, float(r2)) for t, r2 in enumerate(result.r2_values)],
                    config.json_format),
        write_json(out / "validation_summary.json", {
            "model": model, "trials": trials, "seed": config.seed,
            "mean_r2": float(result.r2_values.mean()),
            "p2.5_r2": float(np.percentile(result.r2_values, 2.5)),
            "p97.5_r2": float(np.percentile(result.r2_values, 97.5)),
        }),
    ]
    return files


def _grouping(corpus: Corpus, config: RunConfig, name: str):
    if name == "skill-clusters":
        return clustering.skill_clusters(corpus, k=config.k_skills, seed=config.seed)
    return PREDEFINED_GROUPINGS[name]


def run_correlations(corpus: Corpus, config: RunConfig, grouping_name,
                     unweighted=False) -> list[Path]:
    out = Path(config.out)
    grouping = _grouping(corpus, config, grouping_name)
    table = stats.skill_correlation_table(corpus, grouping,
                                          prob_source=config.prob_source,
                                          weight_by_share=not unweighted)
    rows = []
    for group in sorted(table):
        for target in ("impact", "log10_size", "H_skill"):
            c = table[group][target]
            rows.append((group, target, c.r, c.p, c.n))
    return [write_table(table_path(out, "correlations", config.json_format),
                        ["group", "target", "r", "p", "n"], rows,
                        config.json_format)]


def run_profiles(corpus: Corpus, config: RunConfig, grouping_name, target,
                 bins, unweighted=False) -> list[Path]:
    out = Path(config.out)
    grouping = _grouping(corpus, config, grouping_name)
    groups = stats.resolve_skill_groups(corpus, grouping)
    group_values = {
        g: stats.group_abundance(corpus, ids, weight_by_share=not unweighted)
        for g, ids in groups.items() if ids
    }
    table = metrics.city_metrics_table(corpus, config.prob_source)
    if target == "impact":
        target_values = np.array([m.expected_impact for m in table])
    else:
        target_values = np.array([m.h_skill for m in table])
    profile = stats.binned_profile(group_values, target_values, n_bins=bins)
    rows = []
    for gi, group in enumerate(profile.groups):
        for b in range(profile.matrix.shape[1]):
            rows.append((group, float(profile.edges[b]),
                         float(profile.edges[b + 1]),
                         float(profile.matrix[gi, b])))
    return [write_table(table_path(out, "profiles", config.json_format),
                        ["group", "bin_lo", "bin_hi", "probability"], rows,
                        config.json_format)]


def _robustness_files(out, config, runs, stem) -> list[Path]:
    rows = []
    for run in runs:
        for t, r in enumerate(run.correlations):
            clamp = run.clamp_rates[t] if run.clamp_rates else None
            rows.append((run.experiment, run.parameter, t, float(r), clamp))
    files = [
        write_table(table_path(out, stem, config.json_format),
                    ["experiment", "parameter", "trial", "r", "clamp_rate"],
                    rows, config.json_format),
        write_json(Path(out) / f"{stem}_summary.json",
                   [robustness.summarize(run) for run in runs]),
    ]
    if config.plot == "svg":
        path = Path(out) / f"{stem}.svg"
        figures.robustness_box(path, runs)
        files.append(path)
    return files


def run_robustness_noise(corpus: Corpus, config: RunConfig, errors, trials) -> list[Path]:
    runs = [robustness.noise_experiment(corpus, error, trials, config.seed,
                                        prob_source=config.prob_source,
                                        workers=config.threads)
            for error in errors]
    return _robustness_files(config.out, config, runs, "robustness_noise")


def run_robustness_removal(corpus: Corpus, config: RunConfig, fractions, trials) -> list[Path]:
    runs = [robustness.removal_experiment(corpus, fraction, trials, config.seed,
                                          prob_source=config.prob_source,
                                          workers=config.threads)
            for fraction in fractions]
    return _robustness_files(config.out, config, runs, "robustness_removal")


def run_zscores(corpus: Corpus, config: RunConfig) -> list[Path]:
    out = Path(config.out)
    job_assign = clustering.job_clusters(corpus, k=config.k_jobs, seed=config.seed)
    skill_assign = clustering.skill_clusters(corpus, k=config.k_skills,
                                             seed=config.seed)
    profile = clustering.skill_zscore_profile(corpus, job_assign, skill_assign)
    header = ["skill_type"] + [f"job_cluster_{c}" for c in profile.job_clusters]
    rows = [(t, *[float(z) for z in profile.z[ti]])
            for ti, t in enumerate(profile.skill_types)]
    return [write_table(table_path(out, "skill_zscores", config.json_format),
                        header, rows, config.json_format)]


def run_pipeline(corpus: Corpus, config: RunConfig, args) -> list[Path]:
    """All stages in dependency order; abort on the first failure."""
    n = len(corpus.cities)
    extreme_k = args.extreme_k or max(1, min(50, n // 2))

    def shift_stage():
        if args.shift_m or args.shift_n:
            return run_shift(corpus, config, args.shift_m, args.shift_n,
                             k_jobs=config.k_jobs)
        return run_shift(corpus, config, None, None,
                         largest=extreme_k, smallest=extreme_k,
                         k_jobs=config.k_jobs)

    stages = [
        ("metrics", lambda: run_impact(corpus, config) + run_entropy(corpus, config)),
        ("clustering", lambda: run_cluster_jobs(corpus, config)
            + run_cluster_skills(corpus, config) + run_zscores(corpus, config)),
        ("scaling", lambda: run_scaling(corpus, config)
            + run_stability(corpus, config, rates=[0.7], trials=args.trials)),
        ("shift", shift_stage),
        ("regression", lambda: run_regress(corpus, config, residual_model=args.model)
            + run_validate_split(corpus, config, args.model, args.trials)),
        ("robustness", lambda:
            run_robustness_noise(corpus, config, args.errors, args.trials)
            + run_robustness_removal(corpus, config, args.fractions, args.trials)),
    ]
    files: list[Path] = []
    for name, stage in stages:
        try:
            files.extend(stage())
        except Exception as exc:
            raise StageFailure(name, exc) from exc
    manifest_config = dict(config.as_dict(), extreme_k=extreme_k, model=args.model,
                           errors=args.errors, fractions=args.fractions)
    files = sorted(set(files), key=lambda p: Path(p).name)
    files.append(write_manifest(config.out, manifest_config,
                                [Path(f) for f in files]))
    return files


class StageFailure(Exception):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"pipeline aborted at stage {stage!r}: {cause}")
        self.stage = stage
        self.cause = cause


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    config = _config(args)
    try:
        if getattr(args, "covariates", None) is None and args.command in (
                "regress", "validate-split", "pipeline"):
            raise UrbanImpactError(f"{args.command} requires --covariates")
        corpus = _load(config)
        if args.command == "load-check":
            files = run_load_check(corpus, config)
        elif args.command == "impact":
            files = run_impact(corpus, config)
        elif args.command == "entropy":
            files = run_entropy(corpus, config)
        elif args.command == "cluster-jobs":
            files = run_cluster_jobs(corpus, config, args.kmeans_max_iters,
                                     args.kmeans_tol)
        elif args.command == "cluster-skills":
            files = run_cluster_skills(corpus, config, args.kmeans_max_iters,
                                       args.kmeans_tol)
        elif args.command == "scaling":
            files = run_scaling(corpus, config, args.clusters,
                                args.normalize_shift, args.per_occupation)
        elif args.command == "stability":
            files = run_stability(corpus, config, args.rates, args.trials)
        elif args.command == "shift":
            files = run_shift(corpus, config, args.city_m, args.city_n,
                              args.largest, args.smallest, args.clusters,
                              args.top, k_jobs=args.k_jobs)
        elif args.command == "regress":
            files = run_regress(corpus, config)
        elif args.command == "validate-split":
            files = run_validate_split(corpus, config, args.model, args.trials)
        elif args.command == "correlations":
            files = run_correlations(corpus, config, args.grouping,
                                     args.unweighted_abundance)
        elif args.command == "profiles":
            files = run_profiles(corpus, config, args.grouping, args.target,
                                 args.bins, args.unweighted_abundance)
        elif args.command == "robustness-noise":
            files = run_robustness_noise(corpus, config, args.error, args.trials)
        elif args.command == "robustness-removal":
            files = run_robustness_removal(corpus, config, args.fraction,
                                           args.trials)
        elif args.command == "pipeline":
            files = run_pipeline(corpus, config, args)
        else:  # pragma: no cover
            raise UrbanImpactError(f"unknown command {args.command!r}")
    except StageFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2 if isinstance(exc.cause, UrbanImpactError) else 1
    except UrbanImpactError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception:
        traceback.print_exc()
        return 1

    for path in files:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
