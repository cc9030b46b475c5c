"""
Pytest configuration and shared fixtures for seqfill tests.
"""

import shutil
import tempfile
from typing import Callable

import numpy as np
import pytest

from core.datamodel import SampleRecord, make_record
from gapsim.gaps import GapSpec, MaskPool, simulate_gaps
from gapsim.synthetic import SyntheticSceneParams, build_blob_mask_pool, generate_synthetic_scene
from models.config import ModelConfig
from models.network import TemporalAttentionUNet, build_model


def pytest_addoption(parser):
    parser.addoption(
        "--run-slow", action="store_true", default=False, help="Run desk-scale training tests"
    )


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-slow"):
        return
    skip_slow = pytest.mark.skip(reason="desk-scale run, use --run-slow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def temp_dir():
    """Create a temporary directory for tests."""
    temp_dir = tempfile.mkdtemp()
    yield temp_dir
    shutil.rmtree(temp_dir)


@pytest.fixture
def rng():
    """Fixed-seed numpy generator."""
    return np.random.default_rng(1234)


@pytest.fixture
def scene_params():
    """Small synthetic scene parameters."""
    return SyntheticSceneParams(num_segments=3, length=6, num_channels=4, height=16, width=16)


@pytest.fixture
def make_scene(scene_params) -> Callable[..., SampleRecord]:
    """Factory generating a clean scene from an integer seed."""

    def _make(seed: int = 0, sample_id: str = "scene", **overrides) -> SampleRecord:
        params = scene_params.model_copy(update=overrides)
        return generate_synthetic_scene(params, np.random.default_rng(seed), sample_id)

    return _make


@pytest.fixture
def clean_record(make_scene):
    """Clean 6-frame, 4-channel, 16×16 scene."""
    return make_scene(7, "clean_0")


@pytest.fixture
def blob_pool():
    """Pool of 8 blob masks at 16×16."""
    return build_blob_mask_pool(8, 16, 16, (0.2, 0.6), np.random.default_rng(99))


@pytest.fixture
def gap_spec():
    return GapSpec(max_masked_frame_ratio=0.5)


@pytest.fixture
def masked_record(clean_record, gap_spec, blob_pool):
    """The clean scene with simulated gaps imprinted."""
    masked, _ = simulate_gaps(clean_record, gap_spec, blob_pool, np.random.default_rng(5))
    return masked


@pytest.fixture
def tiny_model_config():
    """Two-level network small enough for exhaustive checks on CPU."""
    return ModelConfig(
        input_channels=4,
        output_channels=4,
        base_channels=8,
        bottleneck_channels=16,
        num_levels=2,
        num_heads=4,
        key_dim=4,
        norm_groups=4,
    )


@pytest.fixture
def tiny_model(tiny_model_config) -> TemporalAttentionUNet:
    """Seeded tiny network in eval mode."""
    return build_model(tiny_model_config, seed=0).eval()


@pytest.fixture
def line_record() -> Callable[..., SampleRecord]:
    """Factory for a 1-channel 1×1 record from per-frame values (None = gap)."""

    def _make(values, days=None, sample_id="line") -> SampleRecord:
        length = len(values)
        days = list(range(1, length + 1)) if days is None else list(days)
        images = np.array([1.0 if v is None else v for v in values], dtype=np.float32)
        mask = np.array([0 if v is None else 1 for v in values], dtype=np.uint8)
        return make_record(
            images.reshape(length, 1, 1, 1),
            days,
            sample_id,
            mask=mask.reshape(length, 1, 1, 1),
        )

    return _make


@pytest.fixture
def single_mask_pool() -> Callable[[int, int], MaskPool]:
    """Factory for a pool holding one full-coverage mask."""

    def _make(height: int, width: int) -> MaskPool:
        return MaskPool(masks=np.ones((1, 1, height, width), dtype=np.uint8), source_tags=("full",))

    return _make
