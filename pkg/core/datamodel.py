import logging
from dataclasses import dataclass, field, replace
from datetime import date
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from dateutil import parser as date_parser

from .exceptions import SampleValidationError

logger = logging.getLogger(__name__)

RECONSTRUCT = "reconstruct"
AUXILIARY = "auxiliary"
CHANNEL_ROLES = (RECONSTRUCT, AUXILIARY)

REFLECTANCE_SCALE = 10_000.0
SPLITS = ("train", "val", "test")


@dataclass(frozen=True)
class SampleRecord:
    """One co-registered image sequence of a single location.

    Attributes:
        images: Reflectance volume of shape (T, C, H, W), values in [0, 1]
        mask: Validity volume of shape (T, 1, H, W); 1 = valid, 0 = missing
        days: Acquisition day numbers of length T, strictly increasing
        channel_roles: One role per channel, ``reconstruct`` or ``auxiliary``
        sample_id: Opaque identifier
        metadata: Free-form annotations persisted with the record
    """

    images: np.ndarray
    mask: np.ndarray
    days: np.ndarray
    channel_roles: Tuple[str, ...]
    sample_id: str
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def length(self) -> int:
        return int(self.images.shape[0])

    @property
    def num_channels(self) -> int:
        return int(self.images.shape[1])

    @property
    def spatial_size(self) -> Tuple[int, int]:
        return int(self.images.shape[2]), int(self.images.shape[3])

    @property
    def reconstruct_channels(self) -> List[int]:
        """Indices of the channels the imputation has to regress."""
        return [i for i, role in enumerate(self.channel_roles) if role == RECONSTRUCT]

    @property
    def auxiliary_channels(self) -> List[int]:
        return [i for i, role in enumerate(self.channel_roles) if role == AUXILIARY]

    def reconstruct_images(self) -> np.ndarray:
        """Image volume restricted to reconstruct channels."""
        return self.images[:, self.reconstruct_channels]

    def valid_pixels(self) -> np.ndarray:
        """Boolean (T, H, W) map of valid observations."""
        return self.mask[:, 0].astype(bool)

    def select_frames(self, frames: Sequence[int]) -> "SampleRecord":
        """Return a record holding only the given frames, in the given order."""
        index = np.asarray(frames, dtype=np.int64)
        return replace(
            self,
            images=self.images[index],
            mask=self.mask[index],
            days=self.days[index],
        )

    def with_metadata(self, **entries: Any) -> "SampleRecord":
        metadata = dict(self.metadata)
        metadata.update(entries)
        return replace(self, metadata=metadata)


@dataclass(frozen=True)
class DatasetManifest:
    """Index of the samples of one dataset split."""

    root: Path
    sample_ids: Tuple[str, ...]
    split: str
    num_channels: int
    height: int
    width: int
    channel_roles: Tuple[str, ...] = ()

    def __post_init__(self):
        if self.split not in SPLITS:
            raise SampleValidationError(
                f"Unknown split tag: {self.split}", {"allowed": ", ".join(SPLITS)}
            )

    def __len__(self) -> int:
        return len(self.sample_ids)

    def sample_path(self, sample_id: str) -> Path:
        return Path(self.root) / sample_id


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of :func:`validate_sample`."""

    sample_id: str
    violations: Tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return not self.violations


def _first_non_finite(volume: np.ndarray) -> Tuple[int, ...]:
    bad = np.argwhere(~np.isfinite(volume))
    return tuple(int(i) for i in bad[0])


def normalize_reflectance(raw: np.ndarray, assume_raw: bool = True) -> np.ndarray:
    """
    Map sensor reflectance to the unit range.

    Values are clipped to [0, 10 000] and divided by 10 000. Pass
    ``assume_raw=False`` for a volume that is already normalized; it is then
    only clipped to [0, 1], so normalizing normalized data changes nothing.

    Args:
        raw: Reflectance volume (any shape), in sensor units unless
            ``assume_raw`` is False
        assume_raw: Rescale from sensor units (True) or only clip (False)

    Returns:
        float32 volume with every value in [0, 1]

    Raises:
        SampleValidationError: If the volume holds a NaN or infinite value
    """
    volume = np.asarray(raw, dtype=np.float64)
    if not np.all(np.isfinite(volume)):
        index = _first_non_finite(volume)
        raise SampleValidationError(
            f"Non-finite reflectance value at index {index}", {"index": index}
        )

    if assume_raw:
        volume = np.clip(volume, 0.0, REFLECTANCE_SCALE) / REFLECTANCE_SCALE
    else:
        volume = np.clip(volume, 0.0, 1.0)
    return volume.astype(np.float32)


def normalize_auxiliary(
    raw: np.ndarray, low: float = -25.0, high: float = 0.0
) -> np.ndarray:
    """Clip auxiliary (e.g. SAR log-amplitude) channels to [low, high] and rescale to [0, 1]."""
    if high <= low:
        raise SampleValidationError(
            "Auxiliary clip range is empty", {"low": low, "high": high}
        )
    volume = np.asarray(raw, dtype=np.float64)
    if not np.all(np.isfinite(volume)):
        index = _first_non_finite(volume)
        raise SampleValidationError(
            f"Non-finite auxiliary value at index {index}", {"index": index}
        )
    return ((np.clip(volume, low, high) - low) / (high - low)).astype(np.float32)


def days_from_dates(dates: Sequence[Any]) -> np.ndarray:
    """
    Convert acquisition dates to day numbers.

    Days are counted from 1 January of the first acquisition's year, so the
    first year yields the plain day-of-year and later years continue past 366.

    Args:
        dates: ISO date strings or ``datetime.date`` objects, in acquisition order

    Returns:
        int64 vector of day numbers
    """
    parsed: List[date] = []
    for value in dates:
        if isinstance(value, date):
            parsed.append(value)
        else:
            parsed.append(date_parser.isoparse(str(value)).date())
    if not parsed:
        return np.zeros(0, dtype=np.int64)
    origin = date(parsed[0].year, 1, 1)
    return np.array([(d - origin).days + 1 for d in parsed], dtype=np.int64)


def validate_sample(record: SampleRecord) -> ValidationReport:
    """
    Check a record against every SampleRecord invariant.

    Violations are reported, not raised; the order of the list is fixed.

    Args:
        record: Record to check

    Returns:
        ValidationReport enumerating violated invariants
    """
    violations: List[str] = []
    images = np.asarray(record.images)
    mask = np.asarray(record.mask)
    days = np.asarray(record.days)

    if images.ndim != 4:
        violations.append("images not a T×C×H×W volume")
    else:
        length, channels, height, width = images.shape
        if mask.shape != (length, 1, height, width):
            violations.append("mask shape does not match images")
        if days.shape != (length,):
            violations.append("days length does not match images")
        if len(record.channel_roles) != channels:
            violations.append("channel_roles count does not match channels")

    if images.size and not np.issubdtype(images.dtype, np.number):
        violations.append("images not numeric")
    elif images.size:
        finite = np.isfinite(images)
        if not finite.all():
            violations.append("images contain undefined values")
        values = images[finite]
        if values.size and (values.min() < 0.0 or values.max() > 1.0):
            violations.append("images outside [0,1]")

    if mask.size and not np.isin(mask, (0, 1)).all():
        violations.append("mask not binary")

    if days.ndim == 1 and days.size:
        if not np.issubdtype(days.dtype, np.integer) and not np.all(
            np.equal(np.mod(days, 1), 0)
        ):
            violations.append("days not integer")
        if days.size > 1 and not np.all(np.diff(days) > 0):
            violations.append("days not strictly increasing")
        if days.min() < 1:
            violations.append("days out of range")

    unknown = sorted(set(record.channel_roles) - set(CHANNEL_ROLES))
    if unknown:
        violations.append(f"unknown channel roles: {', '.join(unknown)}")
    if RECONSTRUCT not in record.channel_roles:
        violations.append("no reconstruct channel")

    if not record.sample_id:
        violations.append("empty sample_id")

    report = ValidationReport(sample_id=record.sample_id, violations=tuple(violations))
    if not report.passed:
        logger.debug(f"Sample {record.sample_id} failed validation: {violations}")
    return report


def require_valid(record: SampleRecord) -> SampleRecord:
    """Raise SampleValidationError unless the record passes validation."""
    report = validate_sample(record)
    if not report.passed:
        raise SampleValidationError(
            f"Sample violates invariants: {'; '.join(report.violations)}",
            {"sample_id": record.sample_id},
        )
    return record


def make_record(
    images: np.ndarray,
    days: Sequence[int],
    sample_id: str,
    mask: Optional[np.ndarray] = None,
    channel_roles: Optional[Sequence[str]] = None,
    metadata: Optional[Dict[str, Any]] = None,
) -> SampleRecord:
    """
    Build a record with canonical dtypes.

    Missing ``mask`` means every pixel is valid; missing ``channel_roles``
    tags every channel for reconstruction.
    """
    volume = np.ascontiguousarray(images, dtype=np.float32)
    if volume.ndim != 4:
        raise SampleValidationError(
            "images must be a T×C×H×W volume", {"sample_id": sample_id}
        )
    length, channels, height, width = volume.shape
    if mask is None:
        mask_volume = np.ones((length, 1, height, width), dtype=np.uint8)
    else:
        mask_volume = np.ascontiguousarray(mask, dtype=np.uint8)
    roles = tuple(channel_roles) if channel_roles else (RECONSTRUCT,) * channels
    return SampleRecord(
        images=volume,
        mask=mask_volume,
        days=np.asarray(days, dtype=np.int64),
        channel_roles=roles,
        sample_id=sample_id,
        metadata=dict(metadata or {}),
    )


def records_equal(a: SampleRecord, b: SampleRecord) -> bool:
    """Field-for-field equality, bit-exact on the array payloads."""
    return (
        a.sample_id == b.sample_id
        and a.channel_roles == b.channel_roles
        and a.images.dtype == b.images.dtype
        and a.mask.dtype == b.mask.dtype
        and np.array_equal(a.images, b.images)
        and np.array_equal(a.mask, b.mask)
        and np.array_equal(a.days, b.days)
        and a.metadata == b.metadata
    )
