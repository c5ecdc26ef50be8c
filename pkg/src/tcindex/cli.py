"""Command-line surface: ingest, compute, analyze, inspect.

Exit codes: 1 usage/config, 2 data, 3 compute. All outputs are UTF-8 and
rerunning a command with identical config and inputs is byte-identical.
"""

from __future__ import annotations

import dataclasses
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import click

from . import __version__, bipartite, complexity, io, stats, workbench
from .errors import ComputeError, DataError
from .ingest import (
    Concordance,
    RecordSchema,
    allocate_weights,
    drop_unknown_region,
    filter_top_share,
    stream_corpus,
    write_rejects,
)

try:
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - py3.10
    import tomli as tomllib


@dataclass
class RunConfig:
    records: str = ""
    concordance: str = ""
    scheme: str = "schmoch35"
    level: str = "corporate"
    share: float = 0.03
    rank_by: str = "weight"
    threshold: float = 1.0
    window: tuple = (1981, 2010)
    width: int = 5
    step: int = 1
    output_dir: str = "out"
    largest_component: bool = False
    region_mode: str = "restrict"
    regions: tuple = ()
    delimiter: str = ","
    list_separator: str = "|"
    date_mode: str = "fiscal_year"
    strict_concordance: bool = False
    jobs: int = 1

    def validate(self, need_records=True):
        if self.scheme not in ("schmoch35", "ipc3"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.level not in ("corporate", "regional"):
            raise ValueError(f"unknown level {self.level!r}")
        if not (0.0 < self.share <= 1.0):
            raise ValueError(f"share must be in (0, 1], got {self.share}")
        if self.threshold <= 0:
            raise ValueError(f"threshold must be positive, got {self.threshold}")
        if self.window[0] > self.window[1]:
            raise ValueError(f"inverted window {self.window}")
        if self.width < 1 or self.step < 1:
            raise ValueError("width and step must be >= 1")
        if need_records:
            if not self.records:
                raise ValueError("records path is required")
            if not Path(self.records).exists():
                raise ValueError(f"records path not found: {self.records}")
            if self.scheme == "schmoch35":
                if not self.concordance:
                    raise ValueError("schmoch35 scheme requires a concordance path")
                if not Path(self.concordance).exists():
                    raise ValueError(f"concordance path not found: {self.concordance}")

    @property
    def window_label(self):
        return f"{self.window[0]}-{self.window[1]}"

    def tag(self, scheme=None, level=None):
        return f"{scheme or self.scheme}_{level or self.level}_{self.window_label}"

    def as_dict(self):
        d = dataclasses.asdict(self)
        d["window"] = list(self.window)
        d["regions"] = list(self.regions)
        return d

    def config_hash(self):
        # identity of the computation: parameters only, not file locations
        # (input content is tracked separately via digests)
        d = self.as_dict()
        for key in ("records", "concordance", "output_dir"):
            d.pop(key, None)
        return io.sha256_text(json.dumps(d, sort_keys=True))


def load_config(path, overrides) -> RunConfig:
    data = {}
    if path:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    data.update({k: v for k, v in overrides.items() if v is not None})
    if "window" in data:
        data["window"] = tuple(int(v) for v in data["window"])
    if "regions" in data:
        data["regions"] = tuple(data["regions"])
    known = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown config key(s): {sorted(unknown)}")
    return RunConfig(**data)


def load_scheme(cfg: RunConfig, which=None) -> Concordance:
    which = which or cfg.scheme
    if which == "ipc3":
        return Concordance.ipc3()
    scheme = Concordance.from_csv(cfg.concordance, name="schmoch35", delimiter=cfg.delimiter)
    if cfg.strict_concordance:
        scheme.validate_field_count(35)
    return scheme


def record_schema(cfg: RunConfig) -> RecordSchema:
    return RecordSchema(
        delimiter=cfg.delimiter,
        list_separator=cfg.list_separator,
        date_mode=cfg.date_mode,
    )


def input_digests(cfg: RunConfig) -> dict:
    digests = {"records": io.sha256_file(cfg.records)}
    if cfg.concordance and Path(cfg.concordance).exists():
        digests["concordance"] = io.sha256_file(cfg.concordance)
    return digests


def base_manifest(cfg: RunConfig) -> dict:
    return {
        "tool_version": __version__,
        "config": cfg.as_dict(),
        "config_hash": cfg.config_hash(),
        "inputs": input_digests(cfg),
    }


# ---------------------------------------------------------------------------
# command bodies (plain functions so tests can call them directly)


def run_ingest(cfg: RunConfig) -> dict:
    cfg.validate()
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    scheme = load_scheme(cfg)
    schema = record_schema(cfg)
    rejects: list = []
    tag = cfg.tag()

    stream = stream_corpus(cfg.records, schema, scheme, cfg.window, rejects)
    if cfg.level == "regional":
        records = list(stream)
        w_corp = allocate_weights(records, scheme, level="corporate")
    else:
        records = None
        w_corp = allocate_weights(stream, scheme, level="corporate")

    total_weight = w_corp.total_weight()
    accepted = w_corp.meta["accepted_records"]
    if cfg.share < 1.0:
        w_corp = filter_top_share(w_corp, cfg.share, cfg.rank_by)
    if cfg.level == "regional":
        retained = set(w_corp.actors)
        records = workbench.restrict_to_actors(records, retained)
        w = drop_unknown_region(allocate_weights(records, scheme, level="regional"))
        w = dataclasses.replace(
            w, meta={**w.meta, "filter_share": cfg.share,
                     "retained_corporations": len(retained)}
        )
    else:
        w = w_corp

    io.write_weight_matrix(w, out / f"weights_{tag}.csv", cfg.delimiter)
    io.write_actor_counts(w, out / f"actor_counts_{tag}.csv", cfg.delimiter)
    write_rejects(rejects, out / f"rejects_{tag}.csv", cfg.delimiter)
    manifest = base_manifest(cfg)
    manifest.update(
        {
            "command": "ingest",
            "accepted_records": accepted,
            "rejected_rows": len(rejects),
            "total_weight": io.round12(total_weight),
            "retained_weight_fraction": io.round12(
                w_corp.meta.get("retained_weight_fraction", 1.0)
            ),
            "n_actors": len(w.actors),
            "n_categories": len(w.categories),
            "outputs": [
                f"weights_{tag}.csv",
                f"actor_counts_{tag}.csv",
                f"rejects_{tag}.csv",
            ],
        }
    )
    io.write_json(manifest, out / f"manifest_ingest_{tag}.json")
    return manifest


def run_compute(cfg: RunConfig) -> dict:
    cfg.validate(need_records=False)
    out = Path(cfg.output_dir)
    tag = cfg.tag()
    weights_path = out / f"weights_{tag}.csv"
    if not weights_path.exists():
        raise DataError(f"ingested matrix not found: {weights_path} (run ingest first)")

    manifest_path = out / f"manifest_compute_{tag}.json"
    weights_digest = io.sha256_file(weights_path)
    if manifest_path.exists():
        # content-hash cache: identical config + matrix means identical outputs
        prev = json.loads(manifest_path.read_text())
        if (
            prev.get("config_hash") == cfg.config_hash()
            and prev.get("weights_digest") == weights_digest
        ):
            return prev

    w = io.read_weight_matrix(
        weights_path,
        counts_path=out / f"actor_counts_{tag}.csv",
        delimiter=cfg.delimiter,
    )
    spec = bipartite.specialize(w, threshold=cfg.threshold)
    result = complexity.tci_eigen(spec, largest_component=cfg.largest_component)
    io.write_complexity_result(result, out / f"complexity_{tag}.csv", cfg.delimiter)
    io.write_json(io.diagnostics_payload(result), out / f"diagnostics_{tag}.json")

    manifest = {
        "tool_version": __version__,
        "config": cfg.as_dict(),
        "config_hash": cfg.config_hash(),
        "command": "compute",
        "weights_digest": weights_digest,
        "n_categories": len(result.categories),
        "n_actors": len(result.actors),
        "outputs": [f"complexity_{tag}.csv", f"diagnostics_{tag}.json"],
    }
    io.write_json(manifest, manifest_path)
    return manifest


def _pipeline_cfg(cfg: RunConfig) -> workbench.PipelineConfig:
    return workbench.PipelineConfig(
        share=cfg.share,
        rank_by=cfg.rank_by,
        threshold=cfg.threshold,
        largest_component=cfg.largest_component,
        region_mode=cfg.region_mode,
        jobs=cfg.jobs,
    )


def _load_windowed_records(cfg: RunConfig, scheme) -> list:
    rejects: list = []
    return list(
        stream_corpus(cfg.records, record_schema(cfg), scheme, cfg.window, rejects)
    )


def run_analyze(cfg: RunConfig, analysis: str) -> dict:
    cfg.validate()
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    pcfg = _pipeline_cfg(cfg)
    manifest = base_manifest(cfg)
    manifest["command"] = f"analyze:{analysis}"
    outputs = []

    if analysis == "panel":
        scheme = load_scheme(cfg)
        records = _load_windowed_records(cfg, scheme)
        _, _, result = workbench.run_pipeline(records, scheme, cfg.level, pcfg)
        sectors = {c: scheme.sector_of(c) or "" for c in result.categories}
        table = workbench.correlation_panel(
            result, sectors, window=cfg.window_label, scheme=cfg.scheme, level=cfg.level
        )
        name = f"panel_{cfg.tag()}.csv"
        io.write_table(table, out / name, cfg.delimiter)
        outputs.append(name)

    elif analysis == "consistency":
        fine_scheme = load_scheme(cfg, "ipc3")
        coarse_scheme = load_scheme(cfg, "schmoch35")
        records = _load_windowed_records(cfg, fine_scheme)
        residuals = {}
        for level in ("corporate", "regional"):
            _, _, fine = workbench.run_pipeline(records, fine_scheme, level, pcfg)
            _, _, coarse = workbench.run_pipeline(records, coarse_scheme, level, pcfg)
            bridge = workbench.build_bridge(fine.categories, coarse_scheme)
            table, resid, _ = workbench.consistency_compare(
                fine, coarse, bridge, window=cfg.window_label, level=level
            )
            name = f"consistency_{level}_{cfg.window_label}.csv"
            io.write_table(table, out / name, cfg.delimiter)
            outputs.append(name)
            residuals[level] = resid
        # both orientations: the paper does not say which sample comes first
        u_cr = stats.mann_whitney_u(residuals["corporate"], residuals["regional"])
        u_rc = stats.mann_whitney_u(residuals["regional"], residuals["corporate"])
        payload = {
            "corporate_vs_regional": _utest_payload(u_cr),
            "regional_vs_corporate": _utest_payload(u_rc),
        }
        name = f"consistency_utest_{cfg.window_label}.json"
        io.write_json(payload, out / name)
        outputs.append(name)

    elif analysis == "rolling":
        scheme = load_scheme(cfg)
        records = _load_windowed_records(cfg, scheme)
        table = workbench.rolling_rankings(
            records, scheme, cfg.level, pcfg, cfg.window, cfg.width, cfg.step
        )
        name = f"rolling_{cfg.tag()}_w{cfg.width}s{cfg.step}.csv"
        io.write_table(table, out / name, cfg.delimiter)
        outputs.append(name)

    elif analysis == "region-pair":
        if len(cfg.regions) != 2:
            raise ValueError("region-pair analysis needs exactly two regions")
        scheme = load_scheme(cfg)
        records = _load_windowed_records(cfg, scheme)
        table = workbench.region_pair_compare(
            records, scheme, tuple(cfg.regions), pcfg, window=cfg.window_label
        )
        name = (
            f"region_pair_{cfg.regions[0]}_{cfg.regions[1]}_"
            f"{cfg.scheme}_{cfg.window_label}.csv"
        )
        io.write_table(table, out / name, cfg.delimiter)
        outputs.append(name)

    else:
        raise ValueError(f"unknown analysis {analysis!r}")

    manifest["outputs"] = outputs
    io.write_json(manifest, out / f"manifest_analyze_{analysis}_{cfg.tag()}.json")
    return manifest


def _utest_payload(u: stats.UTestResult) -> dict:
    return {
        "u": io.round12(u.u),
        "p_two_sided": io.round12(u.p_two_sided),
        "effect_gamma": io.round12(u.effect_gamma),
        "n1": u.n1,
        "n2": u.n2,
        "method": u.method,
    }


def run_inspect(cfg: RunConfig) -> list:
    out = Path(cfg.output_dir)
    if not out.exists():
        raise DataError(f"output directory not found: {out}")
    found = sorted(
        list(out.glob("manifest_*.json")) + list(out.glob("diagnostics_*.json"))
    )
    docs = []
    for path in found:
        docs.append({"file": path.name, "content": json.loads(path.read_text())})
    return docs


# ---------------------------------------------------------------------------
# click wiring


def _guard(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    except (DataError, OSError) as exc:
        click.echo(f"data error: {exc}", err=True)
        sys.exit(2)
    except ComputeError as exc:
        click.echo(f"compute error: {exc}", err=True)
        sys.exit(3)


_shared_options = [
    click.option("--config", "-c", "config_path", type=str, default=None,
                 help="TOML config file; CLI flags override its keys."),
    click.option("--records", type=str, default=None),
    click.option("--concordance", type=str, default=None),
    click.option("--scheme", type=click.Choice(["schmoch35", "ipc3"]), default=None),
    click.option("--level", type=click.Choice(["corporate", "regional"]), default=None),
    click.option("--share", type=float, default=None),
    click.option("--rank-by", "rank_by", type=click.Choice(["weight", "count"]), default=None),
    click.option("--threshold", type=float, default=None),
    click.option("--window", nargs=2, type=int, default=None),
    click.option("--width", type=int, default=None),
    click.option("--step", type=int, default=None),
    click.option("--output-dir", "output_dir", type=str, default=None),
    click.option("--largest-component", "largest_component", is_flag=True, default=None),
    click.option("--region-mode", "region_mode", type=click.Choice(["restrict", "mask"]), default=None),
    click.option("--regions", nargs=2, type=str, default=None),
    click.option("--delimiter", type=str, default=None),
    click.option("--date-mode", "date_mode", type=click.Choice(["fiscal_year", "filing_date"]), default=None),
    click.option("--jobs", type=int, default=None),
]


def shared_options(fn):
    for opt in reversed(_shared_options):
        fn = opt(fn)
    return fn


def _cfg_from(config_path, kwargs) -> RunConfig:
    return load_config(config_path, kwargs)


@click.group()
@click.version_option(version=__version__)
def main():
    """Technological complexity pipeline: patents in, complexity scores out."""


@main.command()
@shared_options
def ingest(config_path, **kwargs):
    """Parse, window, map, allocate and filter into a weight matrix."""
    manifest = _guard(lambda: run_ingest(_guard(_cfg_from, config_path, kwargs)))
    click.echo(json.dumps(manifest, sort_keys=True, indent=2))


@main.command()
@shared_options
def compute(config_path, **kwargs):
    """Specialization network and complexity scores from an ingested matrix."""
    manifest = _guard(lambda: run_compute(_guard(_cfg_from, config_path, kwargs)))
    click.echo(json.dumps(manifest, sort_keys=True, indent=2))


@main.command()
@click.argument(
    "analysis", type=click.Choice(["panel", "consistency", "rolling", "region-pair"])
)
@shared_options
def analyze(analysis, config_path, **kwargs):
    """Run one of the built-in analyses and persist its table."""
    manifest = _guard(
        lambda: run_analyze(_guard(_cfg_from, config_path, kwargs), analysis)
    )
    click.echo(json.dumps(manifest, sort_keys=True, indent=2))


@main.command()
@shared_options
def inspect(config_path, **kwargs):
    """Print manifests and diagnostics from the output directory."""
    docs = _guard(lambda: run_inspect(_guard(_cfg_from, config_path, kwargs)))
    click.echo(json.dumps(docs, sort_keys=True, indent=2))


if __name__ == "__main__":
    main()
