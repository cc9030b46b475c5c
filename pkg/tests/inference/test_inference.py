"""
Tests for window planning and full-length imputation.
"""

from pathlib import Path

import numpy as np
import pytest

from core.base_imputer import ImputationResult
from core.datamodel import RECONSTRUCT, AUXILIARY, make_record
from gapsim.gaps import simulate_gaps, trim_or_pad
from inference.imputation import impute_sequence, imputed_record, save_imputed
from inference.windows import plan_windows
from models.network import forward_record
from providers.filesystem_sample_store import load_sample


class TestPlanWindows:
    """Test the sliding-window decomposition."""

    def test_one_shot(self):
        plan = plan_windows(10, 10)

        assert plan.windows == ((0, 10),)
        assert plan.assignment.tolist() == [0] * 10

    def test_short_sequence(self):
        plan = plan_windows(3, 10)
        assert plan.windows == ((0, 3),)

    def test_two_windows(self):
        plan = plan_windows(15, 10)

        assert plan.windows == ((0, 10), (5, 15))
        assert plan.frames_of(0) == list(range(8))
        assert plan.frames_of(1) == list(range(8, 15))

    def test_five_windows(self):
        plan = plan_windows(30, 10)
        assert plan.windows == ((0, 10), (5, 15), (10, 20), (15, 25), (20, 30))

    def test_last_window_right_aligned(self):
        plan = plan_windows(12, 10)
        assert plan.windows == ((0, 10), (2, 12))

    @pytest.mark.parametrize("length", range(1, 40))
    @pytest.mark.parametrize("window", [1, 2, 3, 6, 10])
    def test_coverage(self, length, window):
        plan = plan_windows(length, window)

        covered = set()
        for start, end in plan.windows:
            assert 0 <= start < end <= length
            assert end - start <= window
            covered.update(range(start, end))
        assert covered == set(range(length))
        assert plan.assignment.shape == (length,)
        for frame, index in enumerate(plan.assignment):
            start, end = plan.windows[index]
            assert start <= frame < end

    def test_as_dict(self):
        plan = plan_windows(15, 10)
        assert plan.as_dict() == {
            "length": 15,
            "window_length": 10,
            "windows": [[0, 10], [5, 15]],
            "assignment": [0] * 8 + [1] * 7,
        }

    def test_invalid(self):
        with pytest.raises(ValueError):
            plan_windows(0, 10)


class TestImputeSequence:
    """Test imputation of sequences of any length."""

    def test_fitting_sequence_equals_forward(self, tiny_model, masked_record):
        result = impute_sequence(tiny_model, masked_record, 6)
        expected, attention = forward_record(tiny_model, masked_record)

        np.testing.assert_array_equal(result.values, expected)
        assert len(result.attention) == 1
        np.testing.assert_array_equal(result.attention[0], attention)

    def test_short_sequence_padded(self, tiny_model, masked_record):
        short = masked_record.select_frames(range(4))
        result = impute_sequence(tiny_model, short, 6)
        padded = trim_or_pad(short, 6, mode="eval").record
        expected, _ = forward_record(tiny_model, padded)

        assert result.values.shape == (4, 4, 16, 16)
        np.testing.assert_array_equal(result.values, expected[:4])
        assert result.attention[0].shape == (4, 6, 6, 4, 4)

    def test_long_sequence_gathers_windows(self, tiny_model, make_scene, blob_pool, gap_spec):
        clean = make_scene(3, "long", length=15)
        masked, _ = simulate_gaps(clean, gap_spec, blob_pool, np.random.default_rng(0))

        result = impute_sequence(tiny_model, masked, 10)

        assert result.values.shape == (15, 4, 16, 16)
        assert len(result.attention) == 2
        assert result.metadata["window_plan"]["windows"] == [[0, 10], [5, 15]]
        second, _ = forward_record(tiny_model, masked.select_frames(range(5, 15)))
        first, _ = forward_record(tiny_model, masked.select_frames(range(0, 10)))
        np.testing.assert_array_equal(result.values[:8], first[:8])
        np.testing.assert_array_equal(result.values[8:], second[3:])


class TestImputedRecord:
    """Test packaging of imputation output."""

    def test_reconstruct_channels_and_provenance(self, masked_record, temp_dir):
        values = np.clip(masked_record.images, 0.0, 1.0)
        unfilled = np.zeros((16, 16), dtype=bool)
        unfilled[0, 0] = True
        result = ImputationResult(values=values, unfilled=unfilled, metadata={"window_plan": {"length": 6}})

        path = save_imputed(masked_record, result, Path(temp_dir) / "out", {"method": "linear"})
        record = load_sample(path)

        assert record.channel_roles == (RECONSTRUCT,) * 4
        assert record.mask[:, 0, 0, 0].tolist() == [0] * 6
        assert record.mask[:, 0, 1:, :].all()
        assert record.metadata["provenance"] == {"method": "linear", "window_plan": {"length": 6}}

    def test_auxiliary_channels_dropped(self):
        images = np.full((2, 3, 4, 4), 0.5, dtype=np.float32)
        record = make_record(images, [1, 2], "aux", channel_roles=(RECONSTRUCT, RECONSTRUCT, AUXILIARY))
        result = ImputationResult(values=np.full((2, 2, 4, 4), 1.2, dtype=np.float32))

        packaged = imputed_record(record, result)

        assert packaged.images.shape == (2, 2, 4, 4)
        assert packaged.images.max() == 1.0
        assert packaged.mask.all()
