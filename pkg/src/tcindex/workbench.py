"""Analysis orchestration: correlation panels, cross-classification
consistency, rolling rankings, and cross-region comparison.

All analyses emit long-format tables with the columns
(window, scheme, level, category, metric, value, rank, note); the
(window, scheme, level, category, metric) key is unique per table.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import pandas as pd

from . import bipartite, complexity, stats
from .errors import ComputeError, DataError
from .ingest import (
    Concordance,
    PatentRecord,
    allocate_weights,
    drop_unknown_region,
    filter_top_share,
    iter_windows,
    window_records,
)
from .matrices import ComplexityResult

log = logging.getLogger(__name__)

TABLE_COLUMNS = ["window", "scheme", "level", "category", "metric", "value", "rank", "note"]


@dataclass(frozen=True)
class PipelineConfig:
    share: float = 0.03
    rank_by: str = "weight"
    threshold: float = 1.0
    largest_component: bool = False
    region_mode: str = "restrict"  # or "mask": reuse the global binary network
    jobs: int = 1


def _table(rows) -> pd.DataFrame:
    df = pd.DataFrame(rows, columns=TABLE_COLUMNS)
    df = df.sort_values(["window", "scheme", "level", "category", "metric"]).reset_index(
        drop=True
    )
    keys = df[["window", "scheme", "level", "category", "metric"]]
    if keys.duplicated().any():
        dup = keys[keys.duplicated()].iloc[0].tolist()
        raise ValueError(f"duplicate analysis key {dup}")
    return df


def restrict_to_actors(records, retained: set):
    """Drop non-retained assignees from each record (and parallel regions);
    records losing all assignees are dropped."""
    out = []
    for rec in records:
        keep = [i for i, a in enumerate(rec.assignees) if a in retained]
        if not keep:
            continue
        if len(keep) == len(rec.assignees):
            out.append(rec)
            continue
        regions = None
        if rec.assignee_regions is not None:
            regions = tuple(rec.assignee_regions[i] for i in keep)
        out.append(
            PatentRecord(
                rec.patent_id,
                rec.fiscal_year,
                tuple(rec.assignees[i] for i in keep),
                regions,
                rec.primary_ipc,
            )
        )
    return out


def run_pipeline(records, scheme: Concordance, level: str, cfg: PipelineConfig):
    """Allocate -> filter -> RTA -> binarize -> TCI for one record set.

    The top-share filter always acts at the corporate level; regional runs
    re-aggregate the filtered corpus by prefecture.
    Returns (weight matrix used, specialization matrix, complexity result).
    """
    w_corp = allocate_weights(records, scheme, level="corporate")
    if cfg.share < 1.0:
        w_corp = filter_top_share(w_corp, cfg.share, cfg.rank_by)
        records = restrict_to_actors(records, set(w_corp.actors))
    if level == "corporate":
        w = w_corp
    elif level == "regional":
        w = drop_unknown_region(allocate_weights(records, scheme, level="regional"))
    else:
        raise ValueError(f"unknown level {level!r}")
    spec = bipartite.specialize(w, threshold=cfg.threshold)
    result = complexity.tci_eigen(spec, largest_component=cfg.largest_component)
    return w, spec, result


# ---------------------------------------------------------------------------
# Fig.1-style correlation panel


_PANEL_PAIRS = [
    ("ubiquity", "avg_diversity"),
    ("ubiquity", "tci"),
    ("tci", "avg_diversity"),
]


def correlation_panel(
    result: ComplexityResult,
    sectors: dict,
    window="",
    scheme="",
    level="",
) -> pd.DataFrame:
    """Pairwise Pearson correlations of (ubiquity, avg. diversity, TCI),
    overall and per sector, plus the scatter data and threshold lines."""
    series = {
        "ubiquity": np.asarray(result.ubiquity, float),
        "avg_diversity": np.asarray(result.avg_diversity, float),
        "tci": np.asarray(result.tci, float),
    }
    rows = []

    def corr_rows(mask, label):
        for a, b in _PANEL_PAIRS:
            metric = f"pearson[{a},{b}]"
            x, y = series[a][mask], series[b][mask]
            if x.size < 3:
                rows.append(
                    dict(window=window, scheme=scheme, level=level, category=label,
                         metric=metric, value=np.nan, rank=np.nan,
                         note="fewer than 3 categories")
                )
                continue
            try:
                r = stats.pearson(x, y)
                note = ""
            except ComputeError as exc:
                r, note = np.nan, str(exc)
            rows.append(
                dict(window=window, scheme=scheme, level=level, category=label,
                     metric=metric, value=r, rank=np.nan, note=note)
            )

    all_mask = np.ones(len(result.categories), dtype=bool)
    corr_rows(all_mask, "__all__")
    sector_of = {c: sectors.get(c, "") for c in result.categories}
    for sec in sorted({s for s in sector_of.values() if s}):
        mask = np.array([sector_of[c] == sec for c in result.categories])
        corr_rows(mask, f"sector:{sec}")

    ranks = stats.rank(result.category_series("tci"), descending=True)
    for i, cat in enumerate(result.categories):
        for name in ("ubiquity", "avg_diversity", "tci", "tci_scaled"):
            vals = series[name] if name in series else np.asarray(result.tci_scaled)
            rows.append(
                dict(window=window, scheme=scheme, level=level, category=cat,
                     metric=name, value=float(vals[i]),
                     rank=ranks[cat] if name == "tci" else np.nan,
                     note=sector_of[cat])
            )

    for metric, value in (
        ("mean_ubiquity", float(series["ubiquity"].mean())),
        ("mean_avg_diversity", float(series["avg_diversity"].mean())),
        ("tci_threshold", 0.0),
    ):
        rows.append(
            dict(window=window, scheme=scheme, level=level, category="__threshold__",
                 metric=metric, value=value, rank=np.nan, note="")
        )
    return _table(rows)


# ---------------------------------------------------------------------------
# Fig.2-style cross-classification consistency


def build_bridge(fine_categories, coarse_scheme: Concordance) -> dict:
    """Map each fine (3-digit) category onto its coarse field."""
    bridge = {}
    for cat in fine_categories:
        coarse = coarse_scheme.categorize(cat)
        if coarse is not None:
            bridge[cat] = coarse
    return bridge


def consistency_compare(
    fine: ComplexityResult,
    coarse: ComplexityResult,
    bridge: dict,
    window="",
    level="",
):
    """Absolute 0-100-scale TCI differences between fine categories and
    their coarse image. Returns (table, residual vector, uncomparable list)."""
    fine_scaled = fine.category_series("tci_scaled")
    coarse_scaled = coarse.category_series("tci_scaled")
    rows, residuals, uncomparable = [], [], []
    for cat in sorted(fine_scaled):
        image = bridge.get(cat)
        if image is None or image not in coarse_scaled:
            uncomparable.append(cat)
            rows.append(
                dict(window=window, scheme="fine~coarse", level=level, category=cat,
                     metric="abs_residual", value=np.nan, rank=np.nan,
                     note="uncomparable")
            )
            continue
        resid = abs(fine_scaled[cat] - coarse_scaled[image])
        residuals.append(resid)
        rows.append(
            dict(window=window, scheme="fine~coarse", level=level, category=cat,
                 metric="abs_residual", value=resid, rank=np.nan, note=image)
        )
    band = sum(1 for v in coarse_scaled.values() if 75.0 <= v <= 100.0)
    rows.append(
        dict(window=window, scheme="fine~coarse", level=level, category="__band__",
             metric="coarse_in_75_100", value=float(band), rank=np.nan, note="")
    )
    return _table(rows), np.array(residuals), uncomparable


# ---------------------------------------------------------------------------
# Fig.S2-style rolling rankings


def rolling_rankings(
    records,
    scheme: Concordance,
    level: str,
    cfg: PipelineConfig,
    span,
    width: int,
    step: int = 1,
) -> pd.DataFrame:
    """Full pipeline per rolling window; failed windows are marked, not fatal."""
    windows = iter_windows(span[0], span[1], width, step)

    def one(win):
        recs = window_records(records, win)
        if not recs:
            return win, None, "empty window"
        try:
            _, _, result = run_pipeline(recs, scheme, level, cfg)
            return win, result, ""
        except (ComputeError, DataError) as exc:
            return win, None, f"{type(exc).__name__}: {exc}"

    if cfg.jobs > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            outcomes = list(pool.map(one, windows))
    else:
        outcomes = [one(w) for w in windows]

    all_categories = sorted(
        {c for _, res, _ in outcomes if res is not None for c in res.categories}
    )
    rows = []
    for win, result, note in sorted(outcomes, key=lambda t: t[0]):
        win_label = f"{win[0]}-{win[1]}"
        if result is None:
            rows.append(
                dict(window=win_label, scheme=scheme.name, level=level,
                     category="__window__", metric="failed", value=1.0,
                     rank=np.nan, note=note)
            )
            continue
        scaled = result.category_series("tci_scaled")
        ranks = stats.rank(result.category_series("tci"), descending=True)
        for cat in all_categories:
            if cat in scaled:
                rows.append(
                    dict(window=win_label, scheme=scheme.name, level=level,
                         category=cat, metric="tci_scaled", value=scaled[cat],
                         rank=ranks[cat], note="")
                )
            else:
                rows.append(
                    dict(window=win_label, scheme=scheme.name, level=level,
                         category=cat, metric="tci_scaled", value=np.nan,
                         rank=np.nan, note="absent")
                )
    return _table(rows)


# ---------------------------------------------------------------------------
# Fig.3-style cross-region comparison


def actor_regions(records) -> dict:
    """Corporation -> set of region codes it files from."""
    out: dict = {}
    for rec in records:
        if rec.assignee_regions is None:
            continue
        for a, r in zip(rec.assignees, rec.assignee_regions):
            if r:
                out.setdefault(a, set()).add(r)
    return out


def region_pair_compare(
    records,
    scheme: Concordance,
    regions,
    cfg: PipelineConfig,
    window="",
) -> pd.DataFrame:
    """Corporate TCI computed per region (corporations filing from that
    region) on the globally filtered corpus, 0-100 scaled, paired by category."""
    r1, r2 = regions
    w_corp = allocate_weights(records, scheme, level="corporate")
    if cfg.share < 1.0:
        w_corp = filter_top_share(w_corp, cfg.share, cfg.rank_by)
        records = restrict_to_actors(records, set(w_corp.actors))
    regions_of = actor_regions(records)

    def one(region):
        idx = [
            i for i, a in enumerate(w_corp.actors) if region in regions_of.get(a, ())
        ]
        if len(idx) < 2:
            raise ValueError(
                f"region {region!r} has fewer than 2 corporations after filtering"
            )
        try:
            if cfg.region_mode == "restrict":
                w_r = w_corp.restrict_actors(idx, extra_meta={"region": region})
                spec = bipartite.specialize(w_r, threshold=cfg.threshold)
            elif cfg.region_mode == "mask":
                spec_global = bipartite.specialize(w_corp, threshold=cfg.threshold)
                keep = [
                    k for k, a in enumerate(spec_global.actors)
                    if region in regions_of.get(a, ())
                ]
                sub = spec_global.m[keep, :]
                col_keep = np.flatnonzero(sub.sum(axis=0) > 0)
                row_keep = np.flatnonzero(sub[:, col_keep].sum(axis=1) > 0)
                spec = spec_global.submatrix(
                    np.asarray(keep)[row_keep], col_keep
                )
            else:
                raise ValueError(f"unknown region_mode {cfg.region_mode!r}")
            result = complexity.tci_eigen(
                spec, largest_component=cfg.largest_component
            )
        except ComputeError as exc:
            raise ComputeError(f"region {region!r}: {exc}") from exc
        return result

    res = {region: one(region) for region in (r1, r2)}
    scaled = {region: res[region].category_series("tci_scaled") for region in res}
    shared = sorted(set(scaled[r1]) & set(scaled[r2]))
    rows = []
    for region in (r1, r2):
        ranks = stats.rank(res[region].category_series("tci"), descending=True)
        for cat, val in sorted(scaled[region].items()):
            rows.append(
                dict(window=window, scheme=scheme.name, level="corporate",
                     category=cat, metric=f"tci_scaled[{region}]", value=val,
                     rank=ranks[cat],
                     note="shared" if cat in shared else "exclusive")
            )
    return _table(rows)
