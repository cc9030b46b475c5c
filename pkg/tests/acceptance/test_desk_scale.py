"""
Desk-scale training runs checking the relative ordering of methods and variants.

These train several small networks on a few hundred synthetic scenes and take
minutes to hours; run them with ``pytest --run-slow``.
"""

from pathlib import Path

import numpy as np
import pytest

from gapsim.gaps import GapSpec, simulate_gaps
from gapsim.synthetic import SyntheticSceneParams, build_blob_mask_pool, generate_synthetic_scene
from imputers import fill_gaps
from inference.imputation import impute_sequence
from metrics.evaluation import aggregate_report, evaluate
from models.checkpoint import load_checkpoint
from models.config import ModelConfig
from models.network import build_model
from training.config import TrainConfig
from training.dataset import GapSimulatedDataset, stable_hash
from training.trainer import Trainer

pytestmark = pytest.mark.slow

NUM_TRAIN = 300
NUM_VAL = 40
NUM_TEST = 50


@pytest.fixture(scope="module")
def desk(tmp_path_factory):
    """Synthetic splits, a blob pool and fixed test gaps shared by every run."""
    params = SyntheticSceneParams(length=10, num_channels=4, height=32, width=32, event_probability=0.1)

    def scenes(prefix, count):
        records = []
        for i in range(count):
            sample_id = f"{prefix}_{i:05d}"
            rng = np.random.default_rng([11, stable_hash(sample_id)])
            records.append(generate_synthetic_scene(params, rng, sample_id))
        return records

    pool = build_blob_mask_pool(64, 32, 32, (0.1, 0.7), np.random.default_rng(5))
    spec = GapSpec()
    test = []
    for clean in scenes("test", NUM_TEST):
        masked, _ = simulate_gaps(clean, spec, pool, np.random.default_rng([7, stable_hash(clean.sample_id)]))
        test.append((masked, clean))
    return {
        "train": scenes("train", NUM_TRAIN),
        "val": scenes("val", NUM_VAL),
        "test": test,
        "pool": pool,
        "spec": spec,
        "dir": tmp_path_factory.mktemp("desk"),
    }


def _train(desk, name, **model_overrides):
    config = ModelConfig(
        base_channels=16, bottleneck_channels=32, num_levels=3, num_heads=4, key_dim=4, **model_overrides
    )
    train_config = TrainConfig(window_length=10, batch_size=4, max_epochs=60, patience=10, learning_rate=1e-3)
    train_set = GapSimulatedDataset(desk["train"], desk["spec"], desk["pool"], 10, "train", seed=0)
    val_set = GapSimulatedDataset(desk["val"], desk["spec"], desk["pool"], 10, "eval", seed=0)
    trainer = Trainer(build_model(config, seed=0), train_config)
    result = trainer.fit(train_set, val_set, Path(desk["dir"]) / f"{name}.seqfill")
    model, _ = load_checkpoint(result.checkpoint_path)
    return model


def _score(desk, method, predict):
    rows = [evaluate(predict(masked), masked, clean, method=method) for masked, clean in desk["test"]]
    return aggregate_report(rows).iloc[0]


def _model_score(desk, name, model):
    return _score(desk, name, lambda record: impute_sequence(model, record, 10).values)


@pytest.fixture(scope="module")
def baseline_scores(desk):
    return {method: _score(desk, method, lambda r, m=method: fill_gaps(r, m)[0]) for method in ("last", "closest", "linear")}


@pytest.fixture(scope="module")
def full_model_score(desk):
    return _model_score(desk, "model", _train(desk, "full"))


class TestMethodOrdering:
    """Trained network against the non-learned baselines."""

    def test_baseline_ordering(self, baseline_scores):
        assert baseline_scores["linear"]["mae"] < baseline_scores["closest"]["mae"] < baseline_scores["last"]["mae"]

    def test_model_beats_linear(self, baseline_scores, full_model_score):
        assert full_model_score["mae"] < 0.95 * baseline_scores["linear"]["mae"]

    def test_model_keeps_valid_pixels(self, full_model_score):
        assert full_model_score["mae_valid"] < 0.01


class TestVariantOrdering:
    """Ablations of the temporal encoder and the day encoding."""

    def test_temporal_encoder_matters(self, desk, full_model_score):
        per_frame = _model_score(desk, "per_frame", _train(desk, "per_frame", temporal_encoder=False))
        assert per_frame["mae"] > 1.3 * full_model_score["mae"]

    def test_day_encoding_matters(self, desk):
        with_days = _model_score(desk, "days", _train(desk, "days", positional_encoding="day_in_sequence"))
        without = _model_score(desk, "none", _train(desk, "none", positional_encoding="none"))
        assert without["mae"] > 1.1 * with_days["mae"]
