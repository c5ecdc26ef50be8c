"""Parsing, concordance mapping, fractional allocation and filtering.

Turns delimited patent record files into a WeightMatrix per
(aggregation level, classification scheme, fiscal-year window).
"""

from __future__ import annotations

import array
import csv
import io
import logging
import math
import re
from dataclasses import dataclass, field
from datetime import date
from typing import Iterable, Iterator, Optional

import numpy as np
from scipy import sparse

from .errors import DataError
from .matrices import WeightMatrix

log = logging.getLogger(__name__)

UNKNOWN_REGION = "unknown"

_IPC3_RE = re.compile(r"^[A-H][0-9]{2}")


@dataclass(frozen=True)
class RecordSchema:
    """Column layout of a patent record file.

    date_mode selects whether the year column carries a precomputed
    Japanese fiscal year ("fiscal_year") or an ISO-8601 filing date
    ("filing_date") to be mapped onto fiscal years (April 1 - March 31).
    """

    delimiter: str = ","
    list_separator: str = "|"
    date_mode: str = "fiscal_year"  # or "filing_date"
    columns: dict = field(
        default_factory=lambda: {
            "patent_id": "patent_id",
            "year": "fiscal_year",
            "assignees": "assignees",
            "assignee_regions": "assignee_regions",
            "primary_ipc": "primary_ipc",
        }
    )

    def __post_init__(self):
        if self.date_mode not in ("fiscal_year", "filing_date"):
            raise ValueError(f"unknown date_mode {self.date_mode!r}")


@dataclass(frozen=True)
class PatentRecord:
    __slots__ = ("patent_id", "fiscal_year", "assignees", "assignee_regions", "primary_ipc")
    patent_id: str
    fiscal_year: int
    assignees: tuple
    assignee_regions: Optional[tuple]  # parallel to assignees when present
    primary_ipc: str


@dataclass(frozen=True)
class Reject:
    row_number: int
    reason: str


def fiscal_year_of(filing_date: str) -> int:
    """Japanese fiscal year of an ISO date: FY runs April 1 through March 31."""
    d = date.fromisoformat(filing_date)
    return d.year if d.month >= 4 else d.year - 1


def _open_text(source, encoding="utf-8"):
    if isinstance(source, (str, bytes)) and not isinstance(source, bytes):
        return open(source, "r", encoding=encoding, newline="")
    if isinstance(source, bytes):
        return io.StringIO(source.decode(encoding))
    if isinstance(source, io.RawIOBase) or isinstance(source, io.BufferedIOBase):
        return io.TextIOWrapper(source, encoding=encoding, newline="")
    return source  # already a text stream


def iter_numbered_records(source, schema: RecordSchema, rejects: list) -> Iterator[tuple]:
    """Stream (row_number, PatentRecord) pairs from a delimited file.

    Per-row failures are appended to `rejects` (row numbers are 1-based and
    count the header as row 1); a malformed header is fatal.
    """
    stream = _open_text(source)
    reader = csv.reader(stream, delimiter=schema.delimiter)
    try:
        header = next(reader)
    except StopIteration:
        raise DataError("empty input: no header row") from None
    header = [h.strip() for h in header]
    cols = schema.columns
    year_col = cols["year"]
    needed = [cols["patent_id"], year_col, cols["assignees"], cols["primary_ipc"]]
    missing = [c for c in needed if c not in header]
    if missing:
        raise DataError(f"malformed header: missing column(s) {missing}")
    idx = {name: header.index(name) for name in header}
    i_id = idx[cols["patent_id"]]
    i_year = idx[year_col]
    i_asg = idx[cols["assignees"]]
    i_ipc = idx[cols["primary_ipc"]]
    i_reg = idx.get(cols.get("assignee_regions", ""), None)
    sep = schema.list_separator
    by_date = schema.date_mode == "filing_date"

    for row_number, row in enumerate(reader, start=2):
        if not row or all(not f.strip() for f in row):
            continue
        if len(row) <= max(i_id, i_year, i_asg, i_ipc):
            rejects.append(Reject(row_number, "short row"))
            continue
        raw_year = row[i_year].strip()
        try:
            fy = fiscal_year_of(raw_year) if by_date else int(raw_year)
        except (ValueError, TypeError):
            rejects.append(Reject(row_number, f"bad year field {raw_year!r}"))
            continue
        assignees = tuple(a.strip() for a in row[i_asg].split(sep) if a.strip())
        if not assignees:
            rejects.append(Reject(row_number, "missing assignee"))
            continue
        ipc = row[i_ipc].strip()
        if not ipc:
            rejects.append(Reject(row_number, "missing primary IPC"))
            continue
        regions = None
        if i_reg is not None and i_reg < len(row) and row[i_reg].strip():
            regions = tuple(r.strip() for r in row[i_reg].split(sep))
            if len(regions) != len(assignees):
                rejects.append(Reject(row_number, "assignee/region length mismatch"))
                continue
        yield row_number, PatentRecord(row[i_id].strip(), fy, assignees, regions, ipc)


def iter_parse_records(source, schema: RecordSchema, rejects: list) -> Iterator[PatentRecord]:
    for _, rec in iter_numbered_records(source, schema, rejects):
        yield rec


def parse_records(source, schema: RecordSchema):
    """Parse a whole file; returns (records, rejects)."""
    rejects: list = []
    records = list(iter_parse_records(source, schema, rejects))
    return records, rejects


def stream_corpus(source, schema: RecordSchema, scheme, window, rejects: list):
    """Stream in-window records whose IPC maps under the scheme.

    Unmapped codes are rejected with their true file row number; windowing
    silently drops out-of-window rows (they are not data errors).
    """
    start_fy, end_fy = window
    if start_fy > end_fy:
        raise ValueError(f"inverted window [{start_fy}, {end_fy}]")
    for row_number, rec in iter_numbered_records(source, schema, rejects):
        if not (start_fy <= rec.fiscal_year <= end_fy):
            continue
        if scheme.categorize(rec.primary_ipc) is None:
            rejects.append(Reject(row_number, f"unmapped IPC {rec.primary_ipc!r}"))
            continue
        yield rec


# ---------------------------------------------------------------------------
# Concordance


@dataclass(frozen=True)
class Concordance:
    """IPC-prefix to technology-field mapping.

    `entries` maps an IPC prefix (subclass like "G06F" or 3-digit class
    like "G06") to a field identifier; `fields` maps field id to
    (label, sector label). When `prefix_length` is set the scheme is a
    plain truncation scheme (3-digit IPC) and `entries` is unused.
    """

    name: str
    entries: dict = field(default_factory=dict)
    fields: dict = field(default_factory=dict)
    prefix_length: Optional[int] = None

    @classmethod
    def ipc3(cls) -> "Concordance":
        return cls(name="ipc3", prefix_length=3)

    @classmethod
    def from_csv(cls, path, name="schmoch35", delimiter=",") -> "Concordance":
        entries = {}
        fields = {}
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh, delimiter=delimiter)
            required = {"ipc_prefix", "field_id", "field_label", "sector_label"}
            if reader.fieldnames is None or not required.issubset(reader.fieldnames):
                raise DataError(
                    f"concordance {path}: expected columns {sorted(required)}"
                )
            for row in reader:
                prefix = row["ipc_prefix"].strip().replace(" ", "")
                fid = row["field_id"].strip()
                if not prefix or not fid:
                    continue
                if prefix in entries and entries[prefix] != fid:
                    raise DataError(
                        f"concordance {path}: prefix {prefix!r} maps to both "
                        f"{entries[prefix]!r} and {fid!r}"
                    )
                entries[prefix] = fid
                fields[fid] = (row["field_label"].strip(), row["sector_label"].strip())
        if not entries:
            raise DataError(f"concordance {path}: no usable rows")
        return cls(name=name, entries=entries, fields=fields)

    def validate_field_count(self, expected: int):
        if self.prefix_length is not None:
            return
        n = len(set(self.entries.values()))
        if n != expected:
            raise DataError(
                f"concordance {self.name!r} has {n} fields, expected {expected}"
            )

    def categorize(self, ipc_code: str) -> Optional[str]:
        """Longest-prefix match; None when the code is unmapped."""
        code = ipc_code.replace(" ", "")
        if self.prefix_length is not None:
            head = code[: self.prefix_length]
            return head if _IPC3_RE.match(head) else None
        best = None
        for n in range(len(code), 0, -1):
            if code[:n] in self.entries:
                best = self.entries[code[:n]]
                break
        return best

    def sector_of(self, field_id: str) -> Optional[str]:
        if self.prefix_length is not None:
            return field_id[:1]
        info = self.fields.get(field_id)
        return info[1] if info else None


def map_classification(record: PatentRecord, scheme: Concordance) -> str:
    """Category of a record's primary IPC code; raises DataError when unmapped."""
    cat = scheme.categorize(record.primary_ipc)
    if cat is None:
        raise DataError(f"unmapped IPC {record.primary_ipc!r}")
    return cat


# ---------------------------------------------------------------------------
# Windowing


def window_records(records: Iterable[PatentRecord], window) -> list:
    start_fy, end_fy = window
    if start_fy > end_fy:
        raise ValueError(f"inverted window [{start_fy}, {end_fy}]")
    return [r for r in records if start_fy <= r.fiscal_year <= end_fy]


def iter_windows(start_fy: int, end_fy: int, width: int, step: int = 1):
    """Closed [s, s+width-1] windows fully inside [start_fy, end_fy]."""
    if width < 1 or step < 1:
        raise ValueError("width and step must be >= 1")
    if start_fy > end_fy:
        raise ValueError(f"inverted span [{start_fy}, {end_fy}]")
    return [
        (s, s + width - 1)
        for s in range(start_fy, end_fy - width + 2, step)
    ]


# ---------------------------------------------------------------------------
# Allocation


def allocate_weights(
    records: Iterable[PatentRecord],
    scheme: Concordance,
    level: str = "corporate",
    rejects: Optional[list] = None,
    meta: Optional[dict] = None,
) -> WeightMatrix:
    """Fractionally allocate each patent's unit weight into a WeightMatrix.

    Corporate level: 1/|assignees| to each assignee in the patent's single
    category. Regional level: 1/|distinct regions| to each distinct region;
    assignees without a region fall into the "unknown" region, which stays
    in the matrix (weight conservation) and is excluded downstream.
    """
    if level not in ("corporate", "regional"):
        raise ValueError(f"unknown aggregation level {level!r}")
    actor_ix: dict = {}
    cat_ix: dict = {}
    rows = array.array("l")
    cols = array.array("l")
    vals = array.array("d")
    counts: dict = {}
    n_accepted = 0

    for pos, rec in enumerate(records, start=1):
        cat = scheme.categorize(rec.primary_ipc)
        if cat is None:
            if rejects is not None:
                rejects.append(Reject(pos, f"unmapped IPC {rec.primary_ipc!r}"))
            continue
        j = cat_ix.setdefault(cat, len(cat_ix))
        if level == "corporate":
            share = 1.0 / len(rec.assignees)
            actors = rec.assignees
        else:
            regions = rec.assignee_regions or (UNKNOWN_REGION,) * len(rec.assignees)
            distinct = sorted({r if r else UNKNOWN_REGION for r in regions})
            share = 1.0 / len(distinct)
            actors = distinct
        for a in actors:
            i = actor_ix.setdefault(a, len(actor_ix))
            rows.append(i)
            cols.append(j)
            vals.append(share)
            counts[i] = counts.get(i, 0) + 1
        n_accepted += 1

    if n_accepted == 0:
        raise DataError("no records could be allocated")

    n_a, n_c = len(actor_ix), len(cat_ix)
    w = sparse.coo_matrix(
        (np.asarray(vals), (np.asarray(rows), np.asarray(cols))), shape=(n_a, n_c)
    ).toarray()

    # lexicographic ordering for reproducibility
    actor_names = list(actor_ix)
    cat_names = list(cat_ix)
    a_order = sorted(range(n_a), key=lambda i: actor_names[i])
    c_order = sorted(range(n_c), key=lambda j: cat_names[j])
    w = w[np.ix_(a_order, c_order)]
    count_vec = np.array([counts.get(i, 0) for i in a_order], dtype=float)

    m = dict(meta or {})
    m.setdefault("level", level)
    m.setdefault("scheme", scheme.name)
    m["accepted_records"] = n_accepted
    unknown_w = 0.0
    if level == "regional" and UNKNOWN_REGION in actor_ix:
        k = [actor_names[i] for i in a_order].index(UNKNOWN_REGION)
        unknown_w = float(w[k].sum())
        log.info("unknown-region weight: %.6f", unknown_w)
    m["unknown_region_weight"] = unknown_w

    return WeightMatrix(
        actors=tuple(actor_names[i] for i in a_order),
        categories=tuple(cat_names[j] for j in c_order),
        weights=w,
        meta=m,
        actor_counts=count_vec,
    )


def drop_unknown_region(w: WeightMatrix) -> WeightMatrix:
    """Remove the synthetic unknown-region row before regional analysis."""
    if UNKNOWN_REGION not in w.actors:
        return w
    keep = [i for i, a in enumerate(w.actors) if a != UNKNOWN_REGION]
    return w.restrict_actors(keep, extra_meta={"dropped_unknown_region": True})


def filter_top_share(
    w: WeightMatrix, share: float, rank_by: str = "weight"
) -> WeightMatrix:
    """Keep the top ceil(share * n) actors by output, ties at the cutoff kept.

    rank_by="weight" ranks actors by total fractional weight (default);
    rank_by="count" ranks by the number of patents they appear on.
    Categories left without weight are dropped; the retained-weight
    fraction is recorded in the result's meta.
    """
    if not (0.0 < share <= 1.0):
        raise ValueError(f"share must be in (0, 1], got {share}")
    if rank_by == "weight":
        scores = w.row_sums()
    elif rank_by == "count":
        if w.actor_counts is None:
            raise ValueError("rank_by='count' requires actor_counts")
        scores = np.asarray(w.actor_counts)
    else:
        raise ValueError(f"unknown rank_by {rank_by!r}")

    n = len(w.actors)
    k = math.ceil(share * n)
    order = np.argsort(-scores, kind="stable")
    cutoff = scores[order[k - 1]]
    keep_mask = scores >= cutoff
    keep_idx = np.flatnonzero(keep_mask)
    total = w.total_weight()
    retained = float(w.weights[keep_idx].sum())
    out = w.restrict_actors(
        keep_idx,
        extra_meta={
            "filter_share": share,
            "filter_rank_by": rank_by,
            "retained_actor_count": int(keep_idx.size),
            "retained_weight_fraction": retained / total if total else 0.0,
        },
    )
    return out


def write_rejects(rejects, path, delimiter=","):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, delimiter=delimiter)
        writer.writerow(["row_number", "reason"])
        for rej in rejects:
            writer.writerow([rej.row_number, rej.reason])
