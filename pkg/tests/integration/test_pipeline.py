"""
Integration tests running the command-line pipeline end to end on a tiny config.
"""

import json
import shutil
from pathlib import Path

import numpy as np
import pandas as pd
import pytest
from click.testing import CliRunner

from cli.main import cli
from core.datamodel import records_equal
from models.checkpoint import load_checkpoint
from providers.filesystem_sample_store import FileSystemSampleStore, load_sample

TEST_CONFIG = str(Path(__file__).resolve().parents[2] / "config" / "test.yaml")

pytestmark = pytest.mark.integration


def _invoke(*args):
    result = CliRunner().invoke(cli, list(args), obj={})
    assert result.exit_code == 0, result.output
    return result


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """Run synth, simulate, train and impute once for the whole module."""
    base = tmp_path_factory.mktemp("pipeline")
    common = ["--config", TEST_CONFIG, "--data-root", str(base / "data"), "--out", str(base / "run"), "--seed", "3"]
    _invoke("synth", *common)
    _invoke("simulate", *common)
    _invoke("train", *common)
    _invoke("impute", *common)
    return {"base": base, "data": base / "data", "run": base / "run", "common": common}


class TestPipeline:
    """The commands working together on one dataset."""

    def test_synth_splits(self, pipeline):
        counts = {}
        for split in ("train", "val", "test"):
            manifest = FileSystemSampleStore.load_manifest(pipeline["data"] / "clean" / split)
            counts[split] = len(manifest.sample_ids)
            assert manifest.num_channels == 4
            assert (manifest.height, manifest.width) == (16, 16)
        assert counts == {"train": 4, "val": 2, "test": 2}

    def test_simulate_pairs_samples(self, pipeline):
        masked_dir = pipeline["data"] / "masked" / "test"
        pairing = json.loads((masked_dir / "pairing.json").read_text())

        assert sorted(pairing) == ["test_00000", "test_00001"]
        masked = load_sample(masked_dir / "test_00000")
        clean = load_sample(pipeline["data"] / "clean" / "test" / "test_00000")
        assert masked.metadata["source"] == "test_00000"
        assert masked.metadata["gap_frames"] == pairing["test_00000"]["gap_frames"]
        assert 1 <= len(masked.metadata["gap_frames"]) <= 3
        valid = masked.valid_pixels()
        np.testing.assert_array_equal(
            np.moveaxis(masked.images, 1, -1)[valid], np.moveaxis(clean.images, 1, -1)[valid]
        )
        assert (pipeline["data"] / "blob_mask_pool" / "meta.json").exists()

    def test_train_outputs(self, pipeline):
        run = pipeline["run"]
        model, extra = load_checkpoint(run / "checkpoint.seqfill")
        log = pd.read_csv(run / "train_log.csv")

        assert model.config.base_channels == 8
        assert 1 <= len(log) <= 2
        assert extra["epoch"] in log["epoch"].tolist()
        assert (run / "config.yaml").exists()
        assert (run / "train_state.pt").exists()

    def test_impute_outputs(self, pipeline):
        imputed_dir = pipeline["data"] / "imputed" / "test"
        record = load_sample(imputed_dir / "test_00001")

        assert record.images.shape == (6, 4, 16, 16)
        assert record.mask.all()
        assert len(record.metadata["provenance"]["checkpoint_id"]) == 12
        panels = sorted((pipeline["run"] / "attention").glob("*/window0_head*.png"))
        assert len(panels) == 4

    def test_evaluate(self, pipeline):
        _invoke("evaluate", *pipeline["common"])
        summary = pd.read_csv(pipeline["run"] / "evaluation" / "summary.csv").set_index("method")

        assert list(summary.index) == ["last", "closest", "linear", "model"]
        assert (summary["sequences"] == 2).all()
        assert summary.loc["linear", "mae_valid"] == 0.0
        assert summary.loc["last", "mae_valid"] == 0.0
        assert (pipeline["run"] / "evaluation" / "by_length.csv").exists()
        assert (pipeline["run"] / "evaluation" / "mae_by_method.png").exists()

    def test_evaluate_baselines_only(self, pipeline, tmp_path):
        args = ["--config", TEST_CONFIG, "--data-root", str(pipeline["data"]), "--out", str(tmp_path)]
        _invoke("evaluate", *args, "--methods", "linear,last")

        summary = pd.read_csv(tmp_path / "evaluation" / "summary.csv")
        assert summary["method"].tolist() == ["linear", "last"]

    def test_export_attention(self, pipeline, tmp_path):
        args = ["--config", TEST_CONFIG, "--data-root", str(pipeline["data"]), "--out", str(tmp_path)]
        checkpoint = str(pipeline["run"] / "checkpoint.seqfill")
        _invoke("export-attention", *args, "--checkpoint", checkpoint, "--sample-id", "test_00000",
                "--query-frame", "2")

        out_dir = tmp_path / "attention" / "test_00000"
        panels = sorted(out_dir.glob("window0_head*.png"))
        assert len(panels) == 4
        assert (out_dir / "sequence.png").stat().st_size > 0

    def test_synth_is_reproducible(self, pipeline, tmp_path):
        _invoke("synth", "--config", TEST_CONFIG, "--data-root", str(tmp_path), "--seed", "3")

        first = load_sample(pipeline["data"] / "clean" / "val" / "val_00001")
        second = load_sample(tmp_path / "clean" / "val" / "val_00001")
        assert records_equal(first, second)


class TestCommandErrors:
    """Failures surface as a clean non-zero exit."""

    def test_invalid_config(self, tmp_path):
        config = tmp_path / "bad.yaml"
        config.write_text("model:\n  num_heads: 3\n  unknown_key: 1\n")

        result = CliRunner().invoke(cli, ["synth", "--config", str(config), "--data-root", str(tmp_path)], obj={})

        assert result.exit_code == 1
        assert "Invalid configuration" in result.output

    def test_missing_config_file(self, tmp_path):
        result = CliRunner().invoke(cli, ["synth", "--config", str(tmp_path / "absent.yaml")], obj={})

        assert result.exit_code == 1
        assert "Config file not found" in result.output

    def test_simulate_without_clean_data(self, tmp_path):
        result = CliRunner().invoke(
            cli, ["simulate", "--config", TEST_CONFIG, "--data-root", str(tmp_path / "empty")], obj={}
        )

        assert result.exit_code == 1
        assert "No clean splits" in result.output

    def test_model_without_checkpoint(self, tmp_path):
        result = CliRunner().invoke(
            cli,
            ["impute", "--config", TEST_CONFIG, "--data-root", str(tmp_path), "--out", str(tmp_path / "run")],
            obj={},
        )

        assert result.exit_code == 1

    def test_evaluate_rejects_invalid_sample(self, pipeline, tmp_path):
        data = tmp_path / "data"
        shutil.copytree(pipeline["data"], data)
        meta_path = data / "masked" / "test" / "test_00000" / "meta.json"
        meta = json.loads(meta_path.read_text())
        meta["days"] = [1] * len(meta["days"])
        meta_path.write_text(json.dumps(meta))

        result = CliRunner().invoke(
            cli,
            ["evaluate", "--config", TEST_CONFIG, "--data-root", str(data), "--out", str(tmp_path / "run"),
             "--methods", "linear"],
            obj={},
        )

        assert result.exit_code == 1
        assert "test_00000 cannot be imputed" in result.output
