"""
Tests for gap sampling, imprinting and trimming.
"""

import numpy as np
import pytest

from core.datamodel import AUXILIARY, RECONSTRUCT, make_record
from core.exceptions import EmptyMaskPoolError, GapSimulationError
from gapsim.gaps import (
    GapPattern,
    GapSpec,
    MaskPool,
    gap_mask_volume,
    imprint,
    masked_frame_bounds,
    sample_gap_pattern,
    simulate_gaps,
    trim_or_pad,
)


def _random_imprint_case(rng):
    """Random record, with some auxiliary channels and prior gaps, and a gap volume."""
    length = int(rng.integers(1, 13))
    channels = int(rng.integers(1, 6))
    height, width = (int(n) for n in rng.integers(2, 13, size=2))
    roles = [RECONSTRUCT] + [RECONSTRUCT if rng.random() < 0.6 else AUXILIARY for _ in range(channels - 1)]
    images = rng.random((length, channels, height, width)).astype(np.float32)
    mask = (rng.random((length, 1, height, width)) < 0.9).astype(np.uint8)
    record = make_record(images, np.arange(1, length + 1) * 5, "case", mask=mask, channel_roles=roles)
    gaps = (rng.random(mask.shape) < rng.uniform(0.0, 1.0)).astype(np.uint8)
    return record, gaps


class TestGapSpec:
    """Test GapSpec validation."""

    def test_defaults(self):
        spec = GapSpec()
        assert spec.max_masked_frame_ratio == 0.5
        assert spec.min_masked_frames == 1

    @pytest.mark.parametrize("ratio", [0.0, 1.5])
    def test_ratio_range(self, ratio):
        with pytest.raises(ValueError):
            GapSpec(max_masked_frame_ratio=ratio)

    def test_blob_coverage_range(self):
        with pytest.raises(ValueError):
            GapSpec(blob_coverage=(0.5, 1.0))


class TestMaskPool:
    """Test MaskPool validation."""

    def test_default_tags(self):
        pool = MaskPool(masks=np.zeros((3, 1, 4, 4), dtype=np.uint8))
        assert pool.source_tags == ("unknown",) * 3
        assert pool.spatial_size == (4, 4)

    def test_non_binary(self):
        with pytest.raises(GapSimulationError):
            MaskPool(masks=np.full((1, 1, 2, 2), 2, dtype=np.uint8))

    def test_wrong_rank(self):
        with pytest.raises(GapSimulationError):
            MaskPool(masks=np.zeros((2, 4, 4), dtype=np.uint8))

    def test_tag_count(self):
        with pytest.raises(GapSimulationError):
            MaskPool(masks=np.zeros((2, 1, 2, 2), dtype=np.uint8), source_tags=("a",))


class TestSampleGapPattern:
    """Test the number and choice of masked frames."""

    def test_bounds_at_half_ratio(self):
        assert masked_frame_bounds(GapSpec(max_masked_frame_ratio=0.5), 10) == (1, 5)

    def test_minimum_dominates_at_tiny_length(self):
        assert masked_frame_bounds(GapSpec(max_masked_frame_ratio=0.5), 1) == (1, 1)
        assert masked_frame_bounds(GapSpec(max_masked_frame_ratio=0.1, min_masked_frames=2), 5) == (2, 2)

    def test_ratio_product_not_rounded_down(self):
        # 0.29 * 100 evaluates to 28.999999999999996
        assert masked_frame_bounds(GapSpec(max_masked_frame_ratio=0.29), 100) == (1, 29)

    def test_count_within_bounds_over_many_draws(self, blob_pool):
        spec = GapSpec(max_masked_frame_ratio=0.5)
        rng = np.random.default_rng(0)
        counts = np.array(
            [sample_gap_pattern(spec, blob_pool, 10, rng).num_masked_frames for _ in range(10_000)]
        )

        assert counts.min() >= 1
        assert counts.max() <= 5
        assert set(np.unique(counts)) == {1, 2, 3, 4, 5}

    def test_frames_sorted_and_unique(self, blob_pool):
        pattern = sample_gap_pattern(GapSpec(max_masked_frame_ratio=1.0), blob_pool, 8, np.random.default_rng(3))

        assert np.all(np.diff(pattern.frames) > 0)
        assert pattern.frames.max() < 8
        assert pattern.masks.shape == (pattern.num_masked_frames, 1, 16, 16)

    def test_reproducible_from_seed(self, blob_pool):
        spec = GapSpec()
        first = sample_gap_pattern(spec, blob_pool, 10, np.random.default_rng(11))
        second = sample_gap_pattern(spec, blob_pool, 10, np.random.default_rng(11))

        np.testing.assert_array_equal(first.frames, second.frames)
        np.testing.assert_array_equal(first.mask_indices, second.mask_indices)

    def test_empty_pool(self):
        pool = MaskPool(masks=np.zeros((0, 1, 4, 4), dtype=np.uint8))
        with pytest.raises(EmptyMaskPoolError):
            sample_gap_pattern(GapSpec(), pool, 5, np.random.default_rng(0))

    def test_gap_volume_out_of_range(self, blob_pool):
        pattern = GapPattern(
            frames=np.array([4]), mask_indices=np.array([0]), masks=blob_pool.masks[:1]
        )
        with pytest.raises(GapSimulationError):
            gap_mask_volume(pattern, 3)


class TestImprint:
    """Test maximum-intensity gap encoding."""

    def test_fully_masked_frame(self, clean_record):
        gaps = np.zeros(clean_record.mask.shape, dtype=np.uint8)
        gaps[2] = 1
        masked, mask = imprint(clean_record, gaps)

        assert np.all(masked.images[2] == 1.0)
        assert np.all(mask[2] == 0)
        np.testing.assert_array_equal(masked.images[[0, 1, 3, 4, 5]], clean_record.images[[0, 1, 3, 4, 5]])

    def test_unmasked_pixels_bit_identical(self):
        rng = np.random.default_rng(31)
        for _ in range(100):
            record, gaps = _random_imprint_case(rng)
            masked, mask = imprint(record, gaps)
            under_gap = gaps[:, 0].astype(bool)

            for channel in range(record.num_channels):
                if channel in record.reconstruct_channels:
                    np.testing.assert_array_equal(
                        masked.images[:, channel][~under_gap], record.images[:, channel][~under_gap]
                    )
                    assert np.all(masked.images[:, channel][under_gap] == 1.0)
                else:
                    np.testing.assert_array_equal(masked.images[:, channel], record.images[:, channel])
            np.testing.assert_array_equal(mask, record.mask * (1 - gaps))
            np.testing.assert_array_equal(masked.mask, mask)

    def test_idempotent(self):
        rng = np.random.default_rng(32)
        for _ in range(100):
            record, gaps = _random_imprint_case(rng)
            once, once_mask = imprint(record, gaps)
            twice, twice_mask = imprint(once, gaps)

            np.testing.assert_array_equal(once.images, twice.images)
            np.testing.assert_array_equal(once_mask, twice_mask)

    def test_auxiliary_channels_untouched(self):
        images = np.full((2, 2, 3, 3), 0.4, dtype=np.float32)
        record = make_record(images, [1, 2], "aux", channel_roles=(RECONSTRUCT, AUXILIARY))
        masked, _ = imprint(record, np.ones((2, 1, 3, 3), dtype=np.uint8))

        assert np.all(masked.images[:, 0] == 1.0)
        assert np.all(masked.images[:, 1] == np.float32(0.4))

    def test_input_not_modified(self, clean_record):
        before = clean_record.images.copy()
        imprint(clean_record, np.ones(clean_record.mask.shape, dtype=np.uint8))
        np.testing.assert_array_equal(clean_record.images, before)

    def test_shape_mismatch(self, clean_record):
        with pytest.raises(GapSimulationError):
            imprint(clean_record, np.ones((6, 1, 8, 8), dtype=np.uint8))

    def test_non_binary_gaps(self, clean_record):
        with pytest.raises(GapSimulationError):
            imprint(clean_record, np.full(clean_record.mask.shape, 3, dtype=np.uint8))


class TestSimulateGaps:
    """Test end-to-end gap injection."""

    def test_gap_volume_matches_mask(self, clean_record, blob_pool):
        masked, gaps = simulate_gaps(clean_record, GapSpec(), blob_pool, np.random.default_rng(1))

        np.testing.assert_array_equal(masked.mask, 1 - gaps)
        masked_frames = np.flatnonzero(gaps.reshape(6, -1).any(axis=1))
        assert 1 <= masked_frames.size <= 3

    def test_pad_frames_never_receive_gaps(self, clean_record, blob_pool):
        for seed in range(20):
            _, gaps = simulate_gaps(
                clean_record, GapSpec(max_masked_frame_ratio=1.0), blob_pool,
                np.random.default_rng(seed), valid_length=4,
            )
            assert not gaps[4:].any()

    def test_pool_size_mismatch(self, clean_record):
        pool = MaskPool(masks=np.ones((1, 1, 8, 8), dtype=np.uint8))
        with pytest.raises(GapSimulationError):
            simulate_gaps(clean_record, GapSpec(), pool, np.random.default_rng(0))


class TestTrimOrPad:
    """Test bringing sequences to the window length."""

    def test_identity_at_exact_length(self, clean_record):
        trimmed = trim_or_pad(clean_record, 6, np.random.default_rng(0))

        assert trimmed.record is clean_record
        assert not trimmed.pad_flags.any()

    def test_random_crop_is_contiguous(self, make_scene):
        record = make_scene(0, length=12)
        for seed in range(10):
            trimmed = trim_or_pad(record, 5, np.random.default_rng(seed))
            start = trimmed.start

            np.testing.assert_array_equal(trimmed.record.days, record.days[start : start + 5])
            np.testing.assert_array_equal(trimmed.record.images, record.images[start : start + 5])

    def test_eval_mode_takes_leading_window(self, make_scene):
        record = make_scene(0, length=12)
        trimmed = trim_or_pad(record, 5, mode="eval")

        assert trimmed.start == 0
        np.testing.assert_array_equal(trimmed.record.days, record.days[:5])

    def test_padding(self, line_record):
        record = line_record([0.2, 0.3, 0.4, 0.5], days=[1, 6, 16, 21])
        trimmed = trim_or_pad(record, 6, mode="eval")
        padded = trimmed.record

        assert padded.length == 6
        assert padded.days.tolist() == [1, 6, 16, 21, 26, 31]
        assert trimmed.pad_flags.tolist() == [False] * 4 + [True] * 2
        assert trimmed.original_length == 4
        assert trimmed.num_pad_frames == 2
        assert np.all(padded.images[4:] == 1.0)
        assert np.all(padded.mask[4:] == 0)

    def test_single_frame_padding_uses_revisit(self, line_record):
        padded = trim_or_pad(line_record([0.5], days=[100]), 3, mode="eval").record
        assert padded.days.tolist() == [100, 105, 110]

    @pytest.mark.parametrize("length", [1, 3, 6, 9])
    def test_output_length_and_days(self, make_scene, length):
        trimmed = trim_or_pad(make_scene(2, length=5), length, np.random.default_rng(0))

        assert trimmed.record.length == length
        assert np.all(np.diff(trimmed.record.days) > 0)

    def test_crop_needs_rng(self, make_scene):
        with pytest.raises(GapSimulationError):
            trim_or_pad(make_scene(0, length=8), 4)

    def test_invalid_length(self, clean_record):
        with pytest.raises(GapSimulationError):
            trim_or_pad(clean_record, 0)

    def test_unknown_mode(self, clean_record):
        with pytest.raises(GapSimulationError):
            trim_or_pad(clean_record, 6, mode="test")
