"""Matplotlib figures for the report path.

All figures render to SVG files next to the delimited reports.  Output is
byte-reproducible: the SVG hash salt is pinned, no creation date is
embedded, and fonts are stored as paths.  The default canvas maps to an
800x600 viewBox.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# cluster palette follows the usual purple/green/yellow/red/blue naming
CLUSTER_COLORS = ["#7e1e9c", "#15b01a", "#e6c200", "#e50000", "#0343df",
                  "#f97306", "#00ffff", "#929591"]

FIGSIZE = (800 / 72, 600 / 72)


def apply_style() -> None:
    plt.rcParams.update({
        "svg.hashsalt": "urbanimpact",
        "figure.figsize": FIGSIZE,
        "font.size": 11,
        "axes.grid": True,
        "grid.alpha": 0.3,
        "axes.spines.top": False,
        "axes.spines.right": False,
    })


def cluster_color(cluster_id: str) -> str:
    try:
        return CLUSTER_COLORS[int(cluster_id) % len(CLUSTER_COLORS)]
    except ValueError:
        # stable fallback for non-numeric ids (hash() is salted per process)
        return CLUSTER_COLORS[sum(cluster_id.encode()) % len(CLUSTER_COLORS)]


def save(fig, path) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def impact_scatter(path, log_size, impact, slope, intercept, r, p) -> None:
    """Expected impact against log10 city size with the best-fit line."""
    apply_style()
    fig, ax = plt.subplots()
    ax.scatter(log_size, impact, s=18, alpha=0.7, color="#1f77b4",
               edgecolors="none")
    xs = np.linspace(min(log_size), max(log_size), 50)
    ax.plot(xs, intercept + slope * xs, color="#d62728",
            label=f"slope={slope:.3g}/decade, r={r:.2f}, p={p:.2g}")
    ax.set_xlabel("log10 city size (total employment)")
    ax.set_ylabel("expected job impact")
    ax.legend(loc="best")
    save(fig, path)


def entropy_panels(path, log_size, h_job, h_skill, one_minus_t) -> None:
    """Three specialization measures against log10 city size."""
    apply_style()
    fig, axes = plt.subplots(1, 3, figsize=FIGSIZE, sharex=True)
    panels = [("H_job", h_job), ("H_skill", h_skill), ("1 - T", one_minus_t)]
    for ax, (label, values) in zip(axes, panels):
        ax.scatter(log_size, values, s=14, alpha=0.7, edgecolors="none")
        slope, intercept = np.polyfit(log_size, values, 1)
        xs = np.linspace(min(log_size), max(log_size), 20)
        ax.plot(xs, intercept + slope * xs, color="#d62728")
        ax.set_xlabel("log10 city size")
        ax.set_ylabel(label)
    fig.tight_layout()
    save(fig, path)


def pca_scatter(path, coords, row_ids, labels) -> None:
    """2-D PCA projection of occupations colored by job cluster."""
    apply_style()
    fig, ax = plt.subplots()
    clusters = sorted(set(labels.values()), key=str)
    for cluster in clusters:
        idx = [i for i, rid in enumerate(row_ids) if labels[rid] == cluster]
        ax.scatter(coords[idx, 0], coords[idx, 1], s=20, alpha=0.8,
                   color=cluster_color(cluster), label=f"cluster {cluster}",
                   edgecolors="none")
    ax.set_xlabel("component 1")
    ax.set_ylabel("component 2")
    ax.legend(loc="best", fontsize=9)
    save(fig, path)


def scaling_loglog(path, series, reference=None) -> None:
    """Per-cluster log-log scatter with fitted lines and slope-1 reference."""
    apply_style()
    fig, ax = plt.subplots()
    for s in series:
        color = cluster_color(s.cluster_id)
        ax.scatter(s.log_size, s.log_count, s=16, alpha=0.6, color=color,
                   edgecolors="none",
                   label=f"cluster {s.cluster_id} (beta={s.beta:.2f})")
        xs = np.linspace(s.log_size.min(), s.log_size.max(), 20)
        ax.plot(xs, s.intercept + s.beta * xs, color=color, linewidth=1.5)
    if reference is not None:
        ref_x, ref_y = reference
        ax.plot(ref_x, ref_y, "k--", linewidth=1, label="slope 1")
    ax.set_xlabel("log10 city size")
    ax.set_ylabel("log10 workers in cluster")
    ax.legend(loc="best", fontsize=9)
    save(fig, path)


def shift_bars(path, report, top_n: int = 15) -> None:
    """Occupation-shift chart: four quadrants of horizontal bars.

    Susceptible occupations are red, resilient blue; dark shades increase
    the impact difference, pale shades decrease it.  Bars in each quadrant
    are ordered by |delta|, and the inset reports the quadrant totals.
    """
    from .shift import rank_shift_records

    apply_style()
    shades = {
        ("susceptible", "increases"): "#b40426",
        ("resilient", "increases"): "#3b4cc0",
        ("susceptible", "decreases"): "#f2a297",
        ("resilient", "decreases"): "#a5c3fe",
    }
    blocks = []
    for resilience in ("susceptible", "resilient"):
        for direction in ("increases", "decreases"):
            records = rank_shift_records(report, f"{resilience}-{direction}")
            blocks.extend((rec, shades[(resilience, direction)])
                          for rec in records[:top_n])

    fig, ax = plt.subplots(figsize=FIGSIZE)
    ys = np.arange(len(blocks))[::-1]
    for y, (rec, color) in zip(ys, blocks):
        ax.barh(y, rec.delta_pct, color=color, height=0.8)
        side = rec.delta_pct >= 0
        ax.text(rec.delta_pct + (0.2 if side else -0.2), y, rec.occ_code,
                va="center", ha="left" if side else "right", fontsize=7)
    ax.axvline(0, color="k", linewidth=0.8)
    ax.set_yticks([])
    ax.set_xlabel("contribution to impact difference (%)")
    ax.set_title(f"{report.city_m} vs {report.city_n}: "
                 f"E_m={report.e_m:.3f}, E_n={report.e_n:.3f}")
    if report.resilient_total is not None:
        ax.text(0.02, 0.02,
                f"resilient total: {report.resilient_total:.1f}%\n"
                f"susceptible total: {report.susceptible_total:.1f}%",
                transform=ax.transAxes, fontsize=9,
                bbox=dict(boxstyle="round", facecolor="white", alpha=0.8))
    save(fig, path)


def robustness_box(path, runs) -> None:
    """Distribution of size-impact correlations per perturbation level."""
    apply_style()
    fig, ax = plt.subplots()
    data = [[r for r in run.correlations if not np.isnan(r)] or [0.0]
            for run in runs]
    positions = np.arange(1, len(runs) + 1)
    ax.boxplot(data, positions=positions, widths=0.6)
    parts = ax.violinplot(data, positions=positions, widths=0.8,
                          showextrema=False)
    for body in parts["bodies"]:
        body.set_alpha(0.3)
    if runs:
        ax.axhline(runs[0].baseline_r, color="#d62728", linewidth=1,
                   linestyle="--", label="baseline")
        ax.legend(loc="best")
    ax.set_xticks(positions)
    ax.set_xticklabels([f"{run.parameter:g}" for run in runs])
    ax.set_xlabel(f"{runs[0].experiment if runs else ''} parameter")
    ax.set_ylabel("Pearson r (log10 size vs impact)")
    save(fig, path)
