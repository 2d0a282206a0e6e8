"""Aggregate per-cascade outputs into published views.

Class-segmented CCDFs, normalized profiles, daily time series, temporal
overlap statistics, motif frequencies, and figure rendering.  CSVs are
the canonical outputs; SVG figures are best effort.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass
from datetime import date, timedelta
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

from .cascade import Cascade, disjoint
from .metrics import CascadeMetrics, normalized_profile
from .motifs import MOTIF_FAMILIES, MotifReport, motif_frequencies, motif_presence_counts

logger = logging.getLogger(__name__)

CATEGORIES = ("political", "non_political")
FALSEHOOD_STATES = ("falsehood", "unclassified")

CCDF_ATTRIBUTES = (
    "depth",
    "max_breadth",
    "structural_virality",
    "n_nodes",
    "duration_minutes",
    "n_unique_users",
)

PROFILE_PAIRINGS = (
    ("depth_pct", "breadth"),
    ("depth_pct", "unique_users"),
    ("depth_pct", "minutes"),
    ("time_pct", "depth"),
    ("time_pct", "unique_users"),
)


@dataclass(frozen=True)
class CascadeClass:
    category: str
    falsehood: str

    @property
    def key(self) -> str:
        return f"{self.category}_{self.falsehood}"


@dataclass(frozen=True)
class CCDFSeries:
    attribute: str
    class_key: str
    points: tuple[tuple[float, float], ...]  # (x, P(X >= x)), x strictly increasing
    n: int  # sample size


def ccdf(values: Sequence[float]) -> list[tuple[float, float]]:
    """Empirical complementary CDF, P(X >= x) at each distinct value."""
    if not values:
        raise ValueError("ccdf of empty sample")
    ordered = sorted(values)
    n = len(ordered)
    points = []
    i = 0
    while i < n:
        x = ordered[i]
        points.append((x, (n - i) / n))
        while i < n and ordered[i] == x:
            i += 1
    return points


def class_of(category: str, falsehood: str) -> CascadeClass:
    if category not in CATEGORIES:
        raise ValueError(f"unknown category {category!r}")
    if falsehood not in FALSEHOOD_STATES:
        raise ValueError(f"unknown falsehood state {falsehood!r}")
    return CascadeClass(category, falsehood)


def ccdf_series(
    rows: Iterable[tuple[CascadeClass, Mapping[str, float]]], attribute: str
) -> list[CCDFSeries]:
    """One CCDF per non-empty class for the given attribute."""
    per_class: dict[str, list[float]] = {}
    for cls, attrs in rows:
        per_class.setdefault(cls.key, []).append(float(attrs[attribute]))
    out = []
    for key in sorted(per_class):
        values = per_class[key]
        out.append(CCDFSeries(attribute, key, tuple(ccdf(values)), len(values)))
    return out


def daily_counts(
    roots: Iterable[tuple[CascadeClass, date]],
) -> dict[str, list[tuple[date, int]]]:
    """Per-class cascade counts by root calendar day, zero-filled corpus-wide."""
    roots = list(roots)
    if not roots:
        return {}
    lo = min(d for _, d in roots)
    hi = max(d for _, d in roots)
    days = [lo + timedelta(days=i) for i in range((hi - lo).days + 1)]
    out: dict[str, list[tuple[date, int]]] = {}
    per_class: dict[str, dict[date, int]] = {}
    for cls, d in roots:
        per_class.setdefault(cls.key, {})[d] = per_class.setdefault(cls.key, {}).get(d, 0) + 1
    for key in sorted(per_class):
        counts = per_class[key]
        out[key] = [(d, counts.get(d, 0)) for d in days]
    return out


@dataclass(frozen=True)
class OverlapStats:
    per_group: Mapping[str, float]  # fraction of disjoint pairs, groups with >= 2 cascades
    corpus_fraction: Optional[float]
    n_pairs: int


def overlap_stats(cascades: Iterable[Cascade]) -> OverlapStats:
    """Fraction of same-group cascade pairs with no temporal overlap."""
    per_group_c: dict[str, list[Cascade]] = {}
    for c in cascades:
        per_group_c.setdefault(c.group_id, []).append(c)
    per_group: dict[str, float] = {}
    total_disjoint = 0
    total_pairs = 0
    for gid in sorted(per_group_c):
        cs = sorted(per_group_c[gid], key=lambda c: (c.start, c.cascade_id))
        n = len(cs)
        if n < 2:
            continue
        pairs = n * (n - 1) // 2
        # Sweep: count overlapping pairs, everything else is disjoint.
        overlapping = 0
        active: list[Cascade] = []
        for c in cs:
            active = [a for a in active if not a.end < c.start]
            overlapping += sum(1 for a in active if not disjoint(a, c))
            active.append(c)
        n_disjoint = pairs - overlapping
        per_group[gid] = n_disjoint / pairs
        total_disjoint += n_disjoint
        total_pairs += pairs
    corpus = total_disjoint / total_pairs if total_pairs else None
    return OverlapStats(per_group=per_group, corpus_fraction=corpus, n_pairs=total_pairs)


# ---------------------------------------------------------------------------
# Emission


def _write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([str(v) for v in row])


def emit_report(
    out_dir: Path,
    metrics: Sequence[CascadeMetrics],
    classes: Mapping[str, CascadeClass],  # cascade_id -> class
    cascades: Sequence[Cascade],
    motif_reports: Sequence[MotifReport],
    render_figures: bool = True,
) -> dict:
    """Write the full report output tree; returns the summary dict."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    rows = []
    for m in metrics:
        cls = classes.get(m.cascade_id)
        if cls is None:
            raise ValueError(f"cascade {m.cascade_id!r} has no class label")
        rows.append(
            (
                cls,
                {
                    "depth": m.depth,
                    "max_breadth": m.max_breadth,
                    "structural_virality": m.structural_virality,
                    "n_nodes": m.n_nodes,
                    "duration_minutes": m.duration_minutes,
                    "n_unique_users": m.n_unique_users,
                },
            )
        )

    all_ccdfs: list[CCDFSeries] = []
    for attribute in CCDF_ATTRIBUTES:
        series = ccdf_series(rows, attribute)
        all_ccdfs.extend(series)
        for s in series:
            _write_csv(
                out_dir / "ccdf" / f"{attribute}__{s.class_key}.csv",
                ("x", "p_ge_x", "n"),
                [(repr(x), repr(p), s.n) for x, p in s.points],
            )

    per_class_metrics: dict[str, list[CascadeMetrics]] = {}
    for m in metrics:
        per_class_metrics.setdefault(classes[m.cascade_id].key, []).append(m)
    for x, y in PROFILE_PAIRINGS:
        for key in sorted(per_class_metrics):
            bins = normalized_profile(per_class_metrics[key], x, y)
            if not bins:
                continue
            _write_csv(
                out_dir / "profiles" / f"{y}_vs_{x}__{key}.csv",
                ("bin_pct", "mean", "stderr", "n"),
                [(b.bin_pct, repr(b.mean), repr(b.stderr), b.n) for b in bins],
            )

    root_days = [
        (classes[c.cascade_id], c.start.date()) for c in cascades if c.cascade_id in classes
    ]
    series_by_class = daily_counts(root_days)
    for key in sorted(series_by_class):
        _write_csv(
            out_dir / "timeseries" / f"daily_counts__{key}.csv",
            ("date", "count"),
            [(d.isoformat(), n) for d, n in series_by_class[key]],
        )

    freq = motif_frequencies(
        motif_reports, {cid: cls.key for cid, cls in classes.items()}
    )
    _write_csv(
        out_dir / "motifs" / "frequencies.csv",
        ("class",) + MOTIF_FAMILIES,
        [
            [key] + [repr(freq[key][f]) for f in MOTIF_FAMILIES]
            for key in sorted(freq)
        ],
    )
    counts = motif_presence_counts(motif_reports)
    _write_csv(
        out_dir / "motifs" / "presence_counts.csv",
        ("motif", "count"),
        [(f, counts[f]) for f in MOTIF_FAMILIES],
    )

    ov = overlap_stats(cascades)
    _write_csv(
        out_dir / "timeseries" / "overlap_per_group.csv",
        ("group_id", "fraction_disjoint"),
        [(gid, repr(frac)) for gid, frac in sorted(ov.per_group.items())],
    )

    summary = {
        "n_cascades": len(metrics),
        "n_per_class": {key: len(ms) for key, ms in sorted(per_class_metrics.items())},
        "n_falsehood": sum(1 for cls in classes.values() if cls.falsehood == "falsehood"),
        "overlap_disjoint_fraction": ov.corpus_fraction,
        "overlap_pairs": ov.n_pairs,
        "motif_presence_counts": counts,
    }
    with (out_dir / "summary.json").open("w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")

    if render_figures:
        try:
            _render_figures(out_dir, all_ccdfs, series_by_class, freq)
        except Exception:  # pragma: no cover - plotting is best effort
            logger.exception("figure rendering failed; CSV outputs are complete")

    return summary


def _render_figures(out_dir: Path, ccdfs, series_by_class, freq) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig_dir = out_dir / "figures"
    fig_dir.mkdir(parents=True, exist_ok=True)

    by_attr: dict[str, list[CCDFSeries]] = {}
    for s in ccdfs:
        by_attr.setdefault(s.attribute, []).append(s)
    for attribute, series in by_attr.items():
        fig, ax = plt.subplots(figsize=(5, 4))
        for s in series:
            xs = [x for x, _ in s.points]
            ps = [p for _, p in s.points]
            ax.step(xs, ps, where="post", label=s.class_key)
        if all(x > 0 for s in series for x, _ in s.points):
            ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel(attribute)
        ax.set_ylabel("P(X >= x)")
        ax.legend(fontsize=7)
        fig.tight_layout()
        fig.savefig(fig_dir / f"ccdf_{attribute}.svg")
        plt.close(fig)

    if series_by_class:
        fig, ax = plt.subplots(figsize=(7, 4))
        for key, series in sorted(series_by_class.items()):
            ax.plot([d for d, _ in series], [n for _, n in series], label=key)
        ax.set_ylabel("cascades per day")
        ax.legend(fontsize=7)
        fig.autofmt_xdate()
        fig.tight_layout()
        fig.savefig(fig_dir / "daily_counts.svg")
        plt.close(fig)

    if freq:
        fig, ax = plt.subplots(figsize=(7, 4))
        width = 0.8 / max(len(freq), 1)
        for i, key in enumerate(sorted(freq)):
            xs = [j + i * width for j in range(len(MOTIF_FAMILIES))]
            ax.bar(xs, [freq[key][f] for f in MOTIF_FAMILIES], width=width, label=key)
        ax.set_xticks(range(len(MOTIF_FAMILIES)))
        ax.set_xticklabels(MOTIF_FAMILIES, rotation=30, fontsize=7)
        ax.set_ylabel("relative frequency")
        ax.legend(fontsize=7)
        fig.tight_layout()
        fig.savefig(fig_dir / "motif_frequencies.svg")
        plt.close(fig)
