import csv
import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from conftest import synthesize_corpus, synthetic_concordance
from tcindex.cli import RunConfig, load_config, main, run_analyze, run_compute, run_ingest


def write_inputs(tmp_path, corpus_text=None):
    records = tmp_path / "records.csv"
    records.write_text(corpus_text or synthesize_corpus())
    con = tmp_path / "concordance.csv"
    con.write_text(synthetic_concordance())
    return records, con


def make_cfg(tmp_path, **kwargs):
    records, con = write_inputs(tmp_path, kwargs.pop("corpus_text", None))
    defaults = dict(
        records=str(records),
        concordance=str(con),
        scheme="schmoch35",
        level="corporate",
        share=1.0,
        window=(1981, 2010),
        output_dir=str(tmp_path / "out"),
    )
    defaults.update(kwargs)
    return RunConfig(**defaults)


class TestIngest:
    def test_manifest_weight_conservation(self, tmp_path):
        cfg = make_cfg(tmp_path)
        manifest = run_ingest(cfg)
        assert manifest["total_weight"] == pytest.approx(manifest["accepted_records"])
        out = Path(cfg.output_dir)
        assert (out / f"weights_{cfg.tag()}.csv").exists()
        assert (out / f"rejects_{cfg.tag()}.csv").exists()

    def test_missing_concordance_exit_1(self, tmp_path):
        records, _ = write_inputs(tmp_path)
        runner = CliRunner()
        result = runner.invoke(
            main,
            [
                "ingest",
                "--records", str(records),
                "--concordance", str(tmp_path / "nope.csv"),
                "--scheme", "schmoch35",
                "--output-dir", str(tmp_path / "out"),
            ],
        )
        assert result.exit_code == 1

    def test_unmapped_rows_in_rejects(self, tmp_path):
        text = (
            "patent_id,fiscal_year,assignees,assignee_regions,primary_ipc\n"
            "P1,1990,a,R1,A01B 1/00\n"
            "P2,1990,b,R1,Z99Z 1/00\n"
            "P3,1990,c,R1,Z88Z 1/00\n"
            "P4,1990,d,R1,B21C 1/00\n"
        )
        cfg = make_cfg(tmp_path, corpus_text=text)
        manifest = run_ingest(cfg)
        assert manifest["rejected_rows"] == 2
        rejects_path = Path(cfg.output_dir) / f"rejects_{cfg.tag()}.csv"
        with open(rejects_path) as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 2
        assert all("unmapped" in r["reason"] for r in rows)

    def test_filter_share_in_manifest(self, tmp_path):
        cfg = make_cfg(tmp_path, share=0.1)
        manifest = run_ingest(cfg)
        assert 0.0 < manifest["retained_weight_fraction"] <= 1.0


class TestCompute:
    def test_scores_match_module_oracle(self, tmp_path):
        from tcindex.bipartite import specialize
        from tcindex.complexity import tci_eigen
        from tcindex.io import read_weight_matrix

        cfg = make_cfg(tmp_path, share=0.5)
        run_ingest(cfg)
        run_compute(cfg)
        out = Path(cfg.output_dir)
        w = read_weight_matrix(out / f"weights_{cfg.tag()}.csv")
        oracle = tci_eigen(specialize(w))
        got = {}
        with open(out / f"complexity_{cfg.tag()}.csv") as fh:
            for row in csv.DictReader(fh):
                if row["kind"] == "category" and row["metric"] == "tci":
                    got[row["identifier"]] = float(row["value"])
        for i, cat in enumerate(oracle.categories):
            assert got[cat] == pytest.approx(oracle.tci[i], abs=1e-9)

    def test_missing_matrix_exit_2(self, tmp_path):
        cfg = make_cfg(tmp_path)
        runner = CliRunner()
        result = runner.invoke(
            main,
            ["compute", "--output-dir", cfg.output_dir, "--share", "1.0",
             "--scheme", "schmoch35"],
        )
        assert result.exit_code == 2

    def test_disconnected_identity_exit_3(self, tmp_path):
        cfg = make_cfg(tmp_path)
        out = Path(cfg.output_dir)
        out.mkdir(parents=True)
        tag = cfg.tag()
        with open(out / f"weights_{tag}.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["actor", "category", "weight"])
            writer.writerow(["a", "x", "1"])
            writer.writerow(["b", "y", "1"])
        with open(out / f"actor_counts_{tag}.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["actor", "patent_count"])
        runner = CliRunner()
        result = runner.invoke(
            main,
            ["compute", "--output-dir", cfg.output_dir, "--share", "1.0",
             "--scheme", "schmoch35", "--window", "1981", "2010"],
        )
        assert result.exit_code == 3
        assert "component" in result.output

    def test_rerun_byte_identical_and_cached(self, tmp_path):
        cfg = make_cfg(tmp_path, share=0.5)
        run_ingest(cfg)
        run_compute(cfg)
        out = Path(cfg.output_dir)
        tag = cfg.tag()
        first = (out / f"complexity_{tag}.csv").read_bytes()
        m2 = run_compute(cfg)  # cache hit: same manifest, same bytes
        assert (out / f"complexity_{tag}.csv").read_bytes() == first
        assert m2["config_hash"] == cfg.config_hash()


class TestAnalyze:
    def test_consistency_identical_schemes_zero_residuals(self, tmp_path):
        # each coarse field holds exactly one fine class here, so the two
        # networks coincide and all residuals vanish
        cfg = make_cfg(tmp_path, share=0.5)
        run_analyze(cfg, "consistency")
        out = Path(cfg.output_dir)
        with open(out / f"consistency_corporate_{cfg.window_label}.csv") as fh:
            rows = [
                r for r in csv.DictReader(fh)
                if r["metric"] == "abs_residual" and r["note"] != "uncomparable"
            ]
        assert rows
        assert all(abs(float(r["value"])) < 1e-9 for r in rows)
        utest = json.loads(
            (out / f"consistency_utest_{cfg.window_label}.json").read_text()
        )
        assert set(utest) == {"corporate_vs_regional", "regional_vs_corporate"}

    def test_rolling_full_span_matches_compute(self, tmp_path):
        cfg = make_cfg(tmp_path, share=0.5, width=30, step=1)
        run_ingest(cfg)
        run_compute(cfg)
        run_analyze(cfg, "rolling")
        out = Path(cfg.output_dir)
        rolled = {}
        with open(out / f"rolling_{cfg.tag()}_w30s1.csv") as fh:
            for row in csv.DictReader(fh):
                if row["metric"] == "tci_scaled":
                    rolled[row["category"]] = float(row["value"])
        computed = {}
        with open(out / f"complexity_{cfg.tag()}.csv") as fh:
            for row in csv.DictReader(fh):
                if row["kind"] == "category" and row["metric"] == "tci_scaled":
                    computed[row["identifier"]] = float(row["value"])
        assert rolled == pytest.approx(computed)

    def test_region_pair_outputs(self, tmp_path):
        cfg = make_cfg(tmp_path, share=0.5, regions=("R1", "R2"))
        run_analyze(cfg, "region-pair")
        out = Path(cfg.output_dir)
        files = list(out.glob("region_pair_R1_R2_*.csv"))
        assert files

    def test_panel_outputs(self, tmp_path):
        cfg = make_cfg(tmp_path, share=0.5)
        run_analyze(cfg, "panel")
        files = list(Path(cfg.output_dir).glob("panel_*.csv"))
        assert files

    def test_region_pair_needs_regions(self, tmp_path):
        cfg = make_cfg(tmp_path)
        with pytest.raises(ValueError, match="two regions"):
            run_analyze(cfg, "region-pair")


class TestConfig:
    def test_toml_roundtrip(self, tmp_path):
        records, con = write_inputs(tmp_path)
        toml = tmp_path / "run.toml"
        toml.write_text(
            f'records = "{records}"\nconcordance = "{con}"\n'
            'scheme = "schmoch35"\nshare = 0.25\nwindow = [1990, 2000]\n'
        )
        cfg = load_config(str(toml), {})
        assert cfg.share == 0.25
        assert cfg.window == (1990, 2000)

    def test_cli_overrides_toml(self, tmp_path):
        records, con = write_inputs(tmp_path)
        toml = tmp_path / "run.toml"
        toml.write_text(f'records = "{records}"\nshare = 0.25\n')
        cfg = load_config(str(toml), {"share": 0.5, "concordance": str(con)})
        assert cfg.share == 0.5

    def test_unknown_key_rejected(self, tmp_path):
        toml = tmp_path / "run.toml"
        toml.write_text("bogus = 1\n")
        with pytest.raises(ValueError, match="unknown config key"):
            load_config(str(toml), {})

    def test_validation_errors(self, tmp_path):
        cfg = make_cfg(tmp_path, share=2.0)
        with pytest.raises(ValueError, match="share"):
            cfg.validate()
        cfg = make_cfg(tmp_path, window=(2000, 1990))
        with pytest.raises(ValueError, match="window"):
            cfg.validate()


class TestInspect:
    def test_prints_manifests(self, tmp_path):
        cfg = make_cfg(tmp_path)
        run_ingest(cfg)
        runner = CliRunner()
        result = runner.invoke(main, ["inspect", "--output-dir", cfg.output_dir])
        assert result.exit_code == 0
        docs = json.loads(result.output)
        assert any("manifest_ingest" in d["file"] for d in docs)
