"""Deterministic artifact serialization: tables, matrices, manifests."""

from __future__ import annotations

import csv
import hashlib
import json

import numpy as np
import pandas as pd

from .errors import DataError
from .matrices import ComplexityResult, WeightMatrix

FLOAT_FORMAT = "%.12g"


def fmt(x) -> str:
    return FLOAT_FORMAT % float(x)


def round12(x):
    """Round-trip a float through 12 significant digits for JSON output."""
    return float(fmt(x))


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def write_json(obj, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2)
        fh.write("\n")


def write_table(df: pd.DataFrame, path, delimiter=","):
    df.to_csv(path, sep=delimiter, index=False, float_format=FLOAT_FORMAT)


def write_weight_matrix(w: WeightMatrix, path, delimiter=","):
    """Long-format (actor, category, weight) CSV; rows in lexicographic order."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, delimiter=delimiter)
        writer.writerow(["actor", "category", "weight"])
        for actor, category, weight in w.to_long():
            writer.writerow([actor, category, fmt(weight)])


def write_actor_counts(w: WeightMatrix, path, delimiter=","):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, delimiter=delimiter)
        writer.writerow(["actor", "patent_count"])
        counts = w.actor_counts
        if counts is None:
            counts = np.zeros(len(w.actors))
        for actor, count in zip(w.actors, counts):
            writer.writerow([actor, fmt(count)])


def read_weight_matrix(path, meta=None, counts_path=None, delimiter=",") -> WeightMatrix:
    actors: dict = {}
    categories: dict = {}
    triples = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:3]] != ["actor", "category", "weight"]:
            raise DataError(f"{path}: expected header actor,category,weight")
        for row in reader:
            if not row:
                continue
            a, c, v = row[0], row[1], float(row[2])
            actors.setdefault(a, len(actors))
            categories.setdefault(c, len(categories))
            triples.append((a, c, v))
    if not triples:
        raise DataError(f"{path}: empty weight matrix")
    a_names = sorted(actors)
    c_names = sorted(categories)
    a_ix = {a: i for i, a in enumerate(a_names)}
    c_ix = {c: j for j, c in enumerate(c_names)}
    w = np.zeros((len(a_names), len(c_names)))
    for a, c, v in triples:
        w[a_ix[a], c_ix[c]] += v
    counts = None
    if counts_path is not None:
        vec = np.zeros(len(a_names))
        with open(counts_path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh, delimiter=delimiter)
            next(reader, None)
            for row in reader:
                if row and row[0] in a_ix:
                    vec[a_ix[row[0]]] = float(row[1])
        counts = vec
    return WeightMatrix(
        actors=tuple(a_names),
        categories=tuple(c_names),
        weights=w,
        meta=dict(meta or {}),
        actor_counts=counts,
    )


def write_complexity_result(result: ComplexityResult, path, delimiter=","):
    """Long-format per-category scores plus per-actor index."""
    from .stats import rank  # local import to avoid a cycle at module load

    ranks = rank(result.category_series("tci"), descending=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, delimiter=delimiter)
        writer.writerow(["kind", "identifier", "metric", "value"])
        for i, cat in enumerate(result.categories):
            writer.writerow(["category", cat, "tci", fmt(result.tci[i])])
            writer.writerow(["category", cat, "tci_scaled", fmt(result.tci_scaled[i])])
            writer.writerow(["category", cat, "ubiquity", fmt(result.ubiquity[i])])
            writer.writerow(
                ["category", cat, "avg_diversity", fmt(result.avg_diversity[i])]
            )
            writer.writerow(["category", cat, "rank", str(ranks[cat])])
        for i, actor in enumerate(result.actors):
            writer.writerow(["actor", actor, "actor_index", fmt(result.actor_index[i])])
        for cat in result.absent_categories:
            writer.writerow(["category", cat, "absent", "1"])
        for actor in result.absent_actors:
            writer.writerow(["actor", actor, "absent", "1"])


def diagnostics_payload(result: ComplexityResult) -> dict:
    d = result.diagnostics.as_dict()
    return {
        "second_eigenvalue": round12(d["second_eigenvalue"]),
        "spectral_gap": round12(d["spectral_gap"]) if np.isfinite(d["spectral_gap"]) else None,
        "iterations": d["iterations"],
        "residual_norm": round12(d["residual_norm"]),
        "component_count": d["component_count"],
        "n_categories": len(result.categories),
        "n_actors": len(result.actors),
        "absent_categories": list(result.absent_categories),
        "absent_actors": list(result.absent_actors),
    }
