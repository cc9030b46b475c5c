"""
Tests for the on-disk sample container and split store.
"""

import json
from pathlib import Path

import numpy as np
import pytest

from core.datamodel import AUXILIARY, RECONSTRUCT, make_record, records_equal
from core.exceptions import (
    ChecksumError,
    HeaderError,
    MissingPayloadError,
    SampleNotFoundError,
    SampleValidationError,
    ShapeMismatchError,
)
from providers.filesystem_sample_store import (
    HEADER_FILE,
    IMAGES_FILE,
    MASK_FILE,
    FileSystemSampleStore,
    load_mask_pool,
    load_sample,
    load_sample_by_id,
    save_mask_pool,
    save_sample,
    validate_manifest,
)


@pytest.fixture
def saved_sample(temp_dir, masked_record):
    """Container directory holding the masked fixture record."""
    return save_sample(masked_record, Path(temp_dir) / "sample")


class TestSampleContainer:
    """Test writing and reading single containers."""

    def test_round_trip_is_bit_exact(self, saved_sample, masked_record):
        loaded = load_sample(saved_sample)

        assert records_equal(loaded, masked_record)

    def test_auxiliary_roles_survive(self, temp_dir):
        images = np.random.default_rng(0).random((3, 2, 4, 4)).astype(np.float32)
        record = make_record(images, [1, 6, 11], "aux", channel_roles=(RECONSTRUCT, AUXILIARY))

        loaded = load_sample(save_sample(record, Path(temp_dir) / "aux"))

        assert loaded.channel_roles == (RECONSTRUCT, AUXILIARY)

    def test_payload_layout(self, saved_sample, masked_record):
        images = np.frombuffer((saved_sample / IMAGES_FILE).read_bytes(), dtype="<f4")
        mask = np.frombuffer((saved_sample / MASK_FILE).read_bytes(), dtype="u1")

        np.testing.assert_array_equal(images.reshape(masked_record.images.shape), masked_record.images)
        np.testing.assert_array_equal(mask.reshape(masked_record.mask.shape), masked_record.mask)

        with open(saved_sample / HEADER_FILE) as f:
            header = json.load(f)
        assert header["shape"] == list(masked_record.images.shape)
        assert header["kind"] == "sample"

    def test_invalid_record_not_written(self, temp_dir):
        images = np.full((2, 1, 2, 2), 2.0, dtype=np.float32)
        record = make_record(images, [1, 2], "bad")

        with pytest.raises(SampleValidationError):
            save_sample(record, Path(temp_dir) / "bad")
        assert not (Path(temp_dir) / "bad" / HEADER_FILE).exists()

    def test_missing_header(self, temp_dir):
        with pytest.raises(MissingPayloadError):
            load_sample(Path(temp_dir) / "nothing")

    def test_missing_payload(self, saved_sample):
        (saved_sample / MASK_FILE).unlink()
        with pytest.raises(MissingPayloadError):
            load_sample(saved_sample)

    def test_incomplete_header(self, saved_sample):
        header_path = saved_sample / HEADER_FILE
        header = json.loads(header_path.read_text())
        del header["days"]
        header_path.write_text(json.dumps(header))

        with pytest.raises(HeaderError, match="days"):
            load_sample(saved_sample)

    def test_unreadable_header(self, saved_sample):
        (saved_sample / HEADER_FILE).write_text("{not json")
        with pytest.raises(HeaderError):
            load_sample(saved_sample)

    def test_truncated_payload(self, saved_sample):
        payload = (saved_sample / IMAGES_FILE).read_bytes()
        (saved_sample / IMAGES_FILE).write_bytes(payload[:-4])

        with pytest.raises(ShapeMismatchError):
            load_sample(saved_sample)

    def test_flipped_byte(self, saved_sample):
        payload = bytearray((saved_sample / IMAGES_FILE).read_bytes())
        payload[10] ^= 0xFF
        (saved_sample / IMAGES_FILE).write_bytes(bytes(payload))

        with pytest.raises(ChecksumError):
            load_sample(saved_sample)

    def test_size_checked_before_checksum(self, saved_sample):
        payload = bytearray((saved_sample / IMAGES_FILE).read_bytes())
        payload[0] ^= 0xFF
        (saved_sample / IMAGES_FILE).write_bytes(bytes(payload[:-4]))

        with pytest.raises(ShapeMismatchError):
            load_sample(saved_sample)


class TestMaskPoolContainer:
    """Test mask pool persistence."""

    def test_round_trip(self, temp_dir, blob_pool):
        loaded = load_mask_pool(save_mask_pool(blob_pool, Path(temp_dir) / "pool"))

        np.testing.assert_array_equal(loaded.masks, blob_pool.masks)
        assert loaded.source_tags == blob_pool.source_tags

    def test_sample_is_not_a_pool(self, saved_sample):
        with pytest.raises(HeaderError, match="mask_pool"):
            load_mask_pool(saved_sample)


class TestFileSystemSampleStore:
    """Test split directories with manifests."""

    def test_add_and_reload(self, temp_dir, make_scene):
        root = Path(temp_dir) / "clean" / "val"
        store = FileSystemSampleStore({"path": root, "split": "val"})
        records = [make_scene(seed, f"val_{seed:05d}") for seed in range(3)]
        for record in records:
            store.add_sample(record)
        manifest = store.write_manifest()

        assert manifest.sample_ids == ("val_00000", "val_00001", "val_00002")
        assert (manifest.num_channels, manifest.height, manifest.width) == (4, 16, 16)

        reopened = FileSystemSampleStore({"path": root})
        assert reopened.split == "val"
        assert len(reopened) == 3
        for original, loaded in zip(records, reopened.iter_samples()):
            assert records_equal(original, loaded)
        assert validate_manifest(reopened.manifest()) == []

    def test_shape_mismatch_rejected(self, temp_dir, make_scene):
        store = FileSystemSampleStore({"path": Path(temp_dir) / "s", "split": "train"})
        store.add_sample(make_scene(0, "a"))

        with pytest.raises(SampleValidationError):
            store.add_sample(make_scene(1, "b", height=8, width=8))

    def test_unknown_sample_id(self, temp_dir, clean_record):
        store = FileSystemSampleStore({"path": Path(temp_dir) / "s", "split": "train"})
        store.add_sample(clean_record)

        with pytest.raises(SampleNotFoundError):
            store.load_sample("absent")

    def test_listed_but_deleted_sample(self, temp_dir, clean_record):
        store = FileSystemSampleStore({"path": Path(temp_dir) / "s", "split": "train"})
        directory = store.add_sample(clean_record)
        manifest = store.write_manifest()
        (directory / HEADER_FILE).unlink()

        with pytest.raises(SampleNotFoundError):
            load_sample_by_id(manifest, clean_record.sample_id)
        assert len(validate_manifest(manifest)) == 1

    def test_missing_manifest(self, temp_dir):
        with pytest.raises(MissingPayloadError):
            FileSystemSampleStore.load_manifest(temp_dir)

    def test_pairing(self, temp_dir):
        store = FileSystemSampleStore({"path": Path(temp_dir) / "masked", "split": "test"})
        store.write_manifest()
        store.write_pairing({"test_00000": {"clean": "/clean/test_00000", "gap_frames": [1, 3]}})

        assert store.read_pairing() == {
            "test_00000": {"clean": "/clean/test_00000", "gap_frames": [1, 3]}
        }

    def test_missing_pairing(self, temp_dir):
        store = FileSystemSampleStore({"path": Path(temp_dir), "split": "test"})
        with pytest.raises(MissingPayloadError):
            store.read_pairing()
