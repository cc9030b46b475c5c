"""Portable on-disk container format for sample records and mask pools.

Layout of one sample directory::

    <root>/<sample_id>/meta.json   UTF-8 JSON header, keys sorted
    <root>/<sample_id>/images.f32  float32 little-endian, row-major T×C×H×W
    <root>/<sample_id>/mask.u8     uint8, row-major T×1×H×W

A dataset split is a directory of sample directories plus ``manifest.json``.
A mask pool uses the same header with ``kind: mask_pool`` and only the
``mask.u8`` payload, shaped N×1×H×W.
"""

import hashlib
import json
import logging
import threading
from pathlib import Path
from typing import Any, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from core.datamodel import (
    DatasetManifest,
    SampleRecord,
    make_record,
    require_valid,
)
from core.exceptions import (
    ChecksumError,
    HeaderError,
    MissingPayloadError,
    SampleNotFoundError,
    SampleValidationError,
    ShapeMismatchError,
)
from gapsim.gaps import MaskPool

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
HEADER_FILE = "meta.json"
IMAGES_FILE = "images.f32"
MASK_FILE = "mask.u8"
MANIFEST_FILE = "manifest.json"
PAIRING_FILE = "pairing.json"

IMAGES_DTYPE = np.dtype("<f4")
MASK_DTYPE = np.dtype("u1")

_SAMPLE_KEYS = ("format_version", "kind", "sample_id", "shape", "days", "channel_roles", "payloads")
_POOL_KEYS = ("format_version", "kind", "shape", "source_tags", "payloads")

PathLike = Union[str, Path]


def _sha256(payload: bytes) -> str:
    return hashlib.sha256(payload).hexdigest()


def _json_default(value: Any) -> Any:
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def _write_json(path: Path, data: Mapping[str, Any]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2, sort_keys=True, default=_json_default)
        f.write("\n")


def _read_header(directory: Path, required: Sequence[str], kind: str) -> Dict[str, Any]:
    header_path = directory / HEADER_FILE
    if not header_path.is_file():
        raise MissingPayloadError(
            f"Container header not found: {header_path}", {"path": str(directory)}
        )
    try:
        with open(header_path, "r", encoding="utf-8") as f:
            header = json.load(f)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise HeaderError(f"Unreadable container header: {header_path}", {"error": e}) from e

    if not isinstance(header, dict):
        raise HeaderError(f"Container header is not a mapping: {header_path}")
    missing = [key for key in required if key not in header]
    if missing:
        raise HeaderError(
            f"Container header lacks keys: {', '.join(missing)}", {"path": str(directory)}
        )
    if header["kind"] != kind:
        raise HeaderError(
            f"Expected a {kind} container, found {header['kind']}", {"path": str(directory)}
        )
    if header["format_version"] != FORMAT_VERSION:
        raise HeaderError(
            f"Unsupported container format version {header['format_version']}",
            {"path": str(directory)},
        )
    return header


def _read_payload(
    directory: Path, entry: Mapping[str, Any], dtype: np.dtype, shape: Tuple[int, ...]
) -> np.ndarray:
    payload_path = directory / entry["file"]
    if not payload_path.is_file():
        raise MissingPayloadError(
            f"Payload file not found: {payload_path}", {"path": str(directory)}
        )
    payload = payload_path.read_bytes()

    expected = int(np.prod(shape)) * dtype.itemsize
    if len(payload) != expected:
        raise ShapeMismatchError(
            f"Payload {entry['file']} holds {len(payload)} bytes, "
            f"header shape {list(shape)} requires {expected}",
            {"path": str(directory)},
        )
    if _sha256(payload) != entry.get("sha256"):
        raise ChecksumError(
            f"Checksum mismatch for payload {entry['file']}", {"path": str(directory)}
        )
    return np.frombuffer(payload, dtype=dtype).reshape(shape).copy()


def save_sample(record: SampleRecord, path: PathLike) -> Path:
    """
    Write a record as one container directory.

    Args:
        record: Record passing ``validate_sample``
        path: Target directory (created if absent, files overwritten)

    Returns:
        The container directory

    Raises:
        SampleValidationError: If the record violates an invariant
    """
    require_valid(record)
    directory = Path(path)
    directory.mkdir(parents=True, exist_ok=True)

    images = np.ascontiguousarray(record.images, dtype=IMAGES_DTYPE).tobytes()
    mask = np.ascontiguousarray(record.mask, dtype=MASK_DTYPE).tobytes()
    (directory / IMAGES_FILE).write_bytes(images)
    (directory / MASK_FILE).write_bytes(mask)

    header = {
        "format_version": FORMAT_VERSION,
        "kind": "sample",
        "sample_id": record.sample_id,
        "shape": list(record.images.shape),
        "days": [int(d) for d in record.days],
        "channel_roles": list(record.channel_roles),
        "payloads": {
            "images": {"file": IMAGES_FILE, "dtype": IMAGES_DTYPE.str, "sha256": _sha256(images)},
            "mask": {"file": MASK_FILE, "dtype": MASK_DTYPE.str, "sha256": _sha256(mask)},
        },
        "metadata": record.metadata,
    }
    _write_json(directory / HEADER_FILE, header)
    logger.debug(f"Saved sample {record.sample_id} to {directory}")
    return directory


def load_sample(path: PathLike) -> SampleRecord:
    """
    Read a record from a container directory.

    Checks run in a fixed order: files present, header complete, payload
    sizes consistent with the header shape, checksums.

    Raises:
        MissingPayloadError: Header or payload file absent
        HeaderError: Header unreadable or incomplete
        ShapeMismatchError: Payload size disagrees with the header shape
        ChecksumError: Payload bytes differ from the recorded checksum
    """
    directory = Path(path)
    header = _read_header(directory, _SAMPLE_KEYS, "sample")

    shape = tuple(int(n) for n in header["shape"])
    if len(shape) != 4:
        raise HeaderError(f"Sample shape must have four axes, got {list(shape)}", {"path": str(directory)})
    length, _, height, width = shape
    if len(header["days"]) != length:
        raise HeaderError(
            f"Header lists {len(header['days'])} days for {length} frames",
            {"path": str(directory)},
        )

    payloads = header["payloads"]
    images = _read_payload(directory, payloads["images"], IMAGES_DTYPE, shape)
    mask = _read_payload(directory, payloads["mask"], MASK_DTYPE, (length, 1, height, width))

    return make_record(
        images=images,
        mask=mask,
        days=header["days"],
        sample_id=header["sample_id"],
        channel_roles=header["channel_roles"],
        metadata=header.get("metadata") or {},
    )


def save_mask_pool(pool: MaskPool, path: PathLike) -> Path:
    """Write a mask pool as a mask-only container."""
    directory = Path(path)
    directory.mkdir(parents=True, exist_ok=True)
    masks = np.ascontiguousarray(pool.masks, dtype=MASK_DTYPE).tobytes()
    (directory / MASK_FILE).write_bytes(masks)
    header = {
        "format_version": FORMAT_VERSION,
        "kind": "mask_pool",
        "shape": list(pool.masks.shape),
        "source_tags": list(pool.source_tags),
        "payloads": {
            "mask": {"file": MASK_FILE, "dtype": MASK_DTYPE.str, "sha256": _sha256(masks)}
        },
    }
    _write_json(directory / HEADER_FILE, header)
    logger.info(f"Saved mask pool of {len(pool)} masks to {directory}")
    return directory


def load_mask_pool(path: PathLike) -> MaskPool:
    """Read a mask pool written by :func:`save_mask_pool`."""
    directory = Path(path)
    header = _read_header(directory, _POOL_KEYS, "mask_pool")
    shape = tuple(int(n) for n in header["shape"])
    if len(shape) != 4 or shape[1] != 1:
        raise HeaderError(f"Mask pool shape must be N×1×H×W, got {list(shape)}", {"path": str(directory)})
    masks = _read_payload(directory, header["payloads"]["mask"], MASK_DTYPE, shape)
    return MaskPool(masks=masks, source_tags=tuple(header["source_tags"]))


class FileSystemSampleStore:
    """Dataset split on the local file system: sample containers plus a manifest."""

    def __init__(self, config: Dict[str, Any]):
        """
        Initialize the store.

        Args:
            config: Configuration dictionary with ``path`` (split directory)
                and ``split`` (train/val/test)
        """
        self.config = config
        self.root = Path(config.get("path", "./data/train"))
        self.split = config.get("split", "train")
        self._lock = threading.RLock()
        self._sample_ids: List[str] = []
        self._shape: Optional[Tuple[int, int, int]] = None
        self._channel_roles: Tuple[str, ...] = ()

        if (self.root / MANIFEST_FILE).exists():
            manifest = self.load_manifest(self.root)
            self._sample_ids = list(manifest.sample_ids)
            self._shape = (manifest.num_channels, manifest.height, manifest.width)
            self._channel_roles = manifest.channel_roles
            self.split = manifest.split

    @property
    def sample_ids(self) -> Tuple[str, ...]:
        return tuple(self._sample_ids)

    def __len__(self) -> int:
        return len(self._sample_ids)

    def add_sample(self, record: SampleRecord) -> Path:
        """
        Save a record into the split and list it in the manifest.

        Raises:
            SampleValidationError: Record invalid or inconsistent with the split
        """
        with self._lock:
            shape = (record.num_channels, *record.spatial_size)
            if self._shape is None:
                self._shape = shape
                self._channel_roles = record.channel_roles
            elif shape != self._shape or record.channel_roles != self._channel_roles:
                raise SampleValidationError(
                    f"Sample shape {shape} does not match the split's {self._shape}",
                    {"sample_id": record.sample_id},
                )
            directory = save_sample(record, self.root / record.sample_id)
            if record.sample_id not in self._sample_ids:
                self._sample_ids.append(record.sample_id)
            return directory

    def write_manifest(self) -> DatasetManifest:
        """Persist the manifest listing every added sample, in insertion order."""
        with self._lock:
            num_channels, height, width = self._shape or (0, 0, 0)
            manifest = DatasetManifest(
                root=self.root,
                sample_ids=tuple(self._sample_ids),
                split=self.split,
                num_channels=num_channels,
                height=height,
                width=width,
                channel_roles=self._channel_roles,
            )
            self.root.mkdir(parents=True, exist_ok=True)
            _write_json(
                self.root / MANIFEST_FILE,
                {
                    "format_version": FORMAT_VERSION,
                    "split": manifest.split,
                    "sample_ids": list(manifest.sample_ids),
                    "num_channels": manifest.num_channels,
                    "height": manifest.height,
                    "width": manifest.width,
                    "channel_roles": list(manifest.channel_roles),
                },
            )
            logger.info(f"Wrote {manifest.split} manifest with {len(manifest)} samples to {self.root}")
            return manifest

    @staticmethod
    def load_manifest(root: PathLike) -> DatasetManifest:
        """
        Read ``manifest.json`` of a split directory.

        Raises:
            MissingPayloadError: No manifest in the directory
            HeaderError: Manifest unreadable or incomplete
        """
        root = Path(root)
        manifest_path = root / MANIFEST_FILE
        if not manifest_path.is_file():
            raise MissingPayloadError(f"Manifest not found: {manifest_path}", {"path": str(root)})
        try:
            with open(manifest_path, "r", encoding="utf-8") as f:
                data = json.load(f)
            return DatasetManifest(
                root=root,
                sample_ids=tuple(data["sample_ids"]),
                split=data["split"],
                num_channels=int(data["num_channels"]),
                height=int(data["height"]),
                width=int(data["width"]),
                channel_roles=tuple(data.get("channel_roles", ())),
            )
        except (json.JSONDecodeError, KeyError, TypeError) as e:
            raise HeaderError(f"Unreadable manifest: {manifest_path}", {"error": e}) from e

    def load_sample(self, sample_id: str) -> SampleRecord:
        return load_sample_by_id(self.manifest(), sample_id)

    def manifest(self) -> DatasetManifest:
        num_channels, height, width = self._shape or (0, 0, 0)
        return DatasetManifest(
            root=self.root,
            sample_ids=tuple(self._sample_ids),
            split=self.split,
            num_channels=num_channels,
            height=height,
            width=width,
            channel_roles=self._channel_roles,
        )

    def iter_samples(self) -> Iterator[SampleRecord]:
        manifest = self.manifest()
        for sample_id in manifest.sample_ids:
            yield load_sample_by_id(manifest, sample_id)

    def write_pairing(self, pairs: Mapping[str, Mapping[str, Any]]) -> Path:
        """Write the index pairing each sample of this split with its source."""
        path = self.root / PAIRING_FILE
        _write_json(path, {"format_version": FORMAT_VERSION, "pairs": dict(pairs)})
        return path

    def read_pairing(self) -> Dict[str, Dict[str, Any]]:
        path = self.root / PAIRING_FILE
        if not path.is_file():
            raise MissingPayloadError(f"Pairing index not found: {path}", {"path": str(self.root)})
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)["pairs"]


def load_sample_by_id(manifest: DatasetManifest, sample_id: str) -> SampleRecord:
    """
    Load one sample listed in a manifest.

    Raises:
        SampleNotFoundError: The id is not listed or its container is absent
    """
    if sample_id not in manifest.sample_ids:
        raise SampleNotFoundError(
            f"Sample {sample_id} is not listed in the {manifest.split} manifest",
            {"sample_id": sample_id, "root": str(manifest.root)},
        )
    directory = manifest.sample_path(sample_id)
    if not (directory / HEADER_FILE).is_file():
        raise SampleNotFoundError(
            f"Sample {sample_id} listed in the manifest cannot be found",
            {"sample_id": sample_id, "path": str(directory)},
        )
    return load_sample(directory)


def validate_manifest(manifest: DatasetManifest) -> List[str]:
    """
    Check that every listed sample resolves to a readable record of the
    manifest's channel count and spatial size.

    Returns:
        Problems found, one entry per offending sample (empty when consistent)
    """
    problems: List[str] = []
    for sample_id in manifest.sample_ids:
        try:
            record = load_sample_by_id(manifest, sample_id)
        except (SampleNotFoundError, MissingPayloadError, HeaderError, ShapeMismatchError, ChecksumError) as e:
            problems.append(f"{sample_id}: {e}")
            continue
        shape = (record.num_channels, *record.spatial_size)
        expected = (manifest.num_channels, manifest.height, manifest.width)
        if shape != expected:
            problems.append(f"{sample_id}: shape {shape} differs from manifest {expected}")
    if problems:
        logger.warning(f"Manifest at {manifest.root} has {len(problems)} problems")
    return problems
