import logging
import math
from dataclasses import dataclass, replace
from typing import Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from core.datamodel import SampleRecord
from core.exceptions import EmptyMaskPoolError, GapSimulationError

logger = logging.getLogger(__name__)

# Acquisition spacing assumed when a single-frame sequence is padded
DEFAULT_REVISIT_DAYS = 5


class GapSpec(BaseModel):
    """Parameters of synthetic gap injection."""

    model_config = ConfigDict(extra="forbid")

    max_masked_frame_ratio: float = Field(0.5, gt=0.0, le=1.0)
    min_masked_frames: int = Field(1, ge=1)
    mask_pool: Optional[str] = None
    blob_pool_size: int = Field(64, ge=1)
    blob_coverage: Tuple[float, float] = (0.1, 0.7)
    seed: int = 0

    @field_validator("blob_coverage")
    @classmethod
    def _coverage_open_interval(cls, value: Tuple[float, float]) -> Tuple[float, float]:
        low, high = value
        if not 0.0 < low <= high < 1.0:
            raise ValueError("blob_coverage must satisfy 0 < low <= high < 1")
        return value


@dataclass(frozen=True)
class MaskPool:
    """Binary gap masks (1 = gap) to superimpose on clean sequences.

    Attributes:
        masks: uint8 volume of shape (N, 1, H, W)
        source_tags: One provenance tag per mask
    """

    masks: np.ndarray
    source_tags: Tuple[str, ...] = ()

    def __post_init__(self):
        masks = np.asarray(self.masks)
        if masks.ndim != 4 or masks.shape[1] != 1:
            raise GapSimulationError(
                f"Mask pool must be an N×1×H×W volume, got shape {masks.shape}"
            )
        if masks.size and not np.isin(masks, (0, 1)).all():
            raise GapSimulationError("Mask pool contains non-binary values")
        tags = tuple(self.source_tags) or ("unknown",) * masks.shape[0]
        if len(tags) != masks.shape[0]:
            raise GapSimulationError(
                f"Mask pool has {masks.shape[0]} masks but {len(tags)} source tags"
            )
        object.__setattr__(self, "masks", masks.astype(np.uint8, copy=False))
        object.__setattr__(self, "source_tags", tags)

    def __len__(self) -> int:
        return int(self.masks.shape[0])

    @property
    def spatial_size(self) -> Tuple[int, int]:
        return int(self.masks.shape[2]), int(self.masks.shape[3])


@dataclass(frozen=True)
class GapPattern:
    """Frames chosen for masking and the pool mask assigned to each."""

    frames: np.ndarray
    mask_indices: np.ndarray
    masks: np.ndarray

    @property
    def num_masked_frames(self) -> int:
        return int(self.frames.shape[0])


@dataclass(frozen=True)
class TrimmedSequence:
    """A record brought to the training window length.

    Attributes:
        record: Record of exactly the requested length
        pad_flags: Boolean vector, True for appended no-data frames
        original_length: Number of real frames in ``record``
        start: Index of the first kept frame in the source sequence
    """

    record: SampleRecord
    pad_flags: np.ndarray
    original_length: int
    start: int = 0

    @property
    def num_pad_frames(self) -> int:
        return int(np.count_nonzero(self.pad_flags))


def masked_frame_bounds(spec: GapSpec, length: int) -> Tuple[int, int]:
    """Inclusive range of the number of masked frames for a sequence of ``length``."""
    low = max(1, spec.min_masked_frames)
    # guard against ratio·T landing just below an integer
    high = max(spec.min_masked_frames, math.floor(spec.max_masked_frame_ratio * length + 1e-9))
    high = min(high, length)
    return min(low, high), high


def sample_gap_pattern(
    spec: GapSpec, pool: MaskPool, length: int, rng: np.random.Generator
) -> GapPattern:
    """
    Choose which frames receive a gap and which pool mask each one gets.

    Args:
        spec: Gap parameters
        pool: Non-empty mask pool
        length: Number of frames available for masking
        rng: Random generator; the pattern is a pure function of its state

    Returns:
        GapPattern with frames sorted ascending

    Raises:
        EmptyMaskPoolError: If the pool holds no mask
        GapSimulationError: If ``length`` < 1
    """
    if len(pool) == 0:
        raise EmptyMaskPoolError("Cannot sample gaps from an empty mask pool")
    if length < 1:
        raise GapSimulationError(f"Sequence length must be >= 1, got {length}")

    low, high = masked_frame_bounds(spec, length)
    count = int(rng.integers(low, high + 1))
    frames = np.sort(rng.choice(length, size=count, replace=False)).astype(np.int64)
    mask_indices = rng.integers(0, len(pool), size=count).astype(np.int64)
    return GapPattern(frames=frames, mask_indices=mask_indices, masks=pool.masks[mask_indices])


def gap_mask_volume(pattern: GapPattern, length: int) -> np.ndarray:
    """Expand a pattern to a (T, 1, H, W) uint8 volume, 1 marking a gap."""
    height, width = pattern.masks.shape[-2:]
    volume = np.zeros((length, 1, height, width), dtype=np.uint8)
    if pattern.num_masked_frames and pattern.frames.max() >= length:
        raise GapSimulationError(
            f"Gap pattern addresses frame {int(pattern.frames.max())} of a {length}-frame sequence"
        )
    volume[pattern.frames] = pattern.masks
    return volume


def imprint(record: SampleRecord, gap_masks: np.ndarray) -> Tuple[SampleRecord, np.ndarray]:
    """
    Encode gaps in the images at maximum intensity.

    Every pixel under a gap gets value 1.0 in all reconstruct channels and
    mask value 0. Auxiliary channels and pixels outside the gaps are left
    bit-identical.

    Args:
        record: Record to mask
        gap_masks: Binary (T, 1, H, W) volume, 1 = gap

    Returns:
        Masked record and its updated mask volume

    Raises:
        GapSimulationError: On shape mismatch or non-binary gap masks
    """
    gaps = np.asarray(gap_masks)
    if gaps.shape != record.mask.shape:
        raise GapSimulationError(
            f"Gap mask shape {gaps.shape} does not match record mask {record.mask.shape}",
            {"sample_id": record.sample_id},
        )
    if gaps.size and not np.isin(gaps, (0, 1)).all():
        raise GapSimulationError("Gap masks must be binary", {"sample_id": record.sample_id})

    under_gap = gaps[:, 0].astype(bool)
    images = record.images.copy()
    for channel in record.reconstruct_channels:
        images[:, channel][under_gap] = 1.0
    mask = record.mask.copy()
    mask[:, 0][under_gap] = 0
    return replace(record, images=images, mask=mask), mask


def simulate_gaps(
    record: SampleRecord,
    spec: GapSpec,
    pool: MaskPool,
    rng: np.random.Generator,
    valid_length: Optional[int] = None,
) -> Tuple[SampleRecord, np.ndarray]:
    """
    Sample a gap pattern for a clean record and imprint it.

    Args:
        record: Clean record
        spec: Gap parameters
        pool: Mask pool matching the record's spatial size
        rng: Random generator
        valid_length: Only the first ``valid_length`` frames may receive gaps
            (pad frames appended after them are left alone)

    Returns:
        Masked record and the (T, 1, H, W) gap volume
    """
    if pool.spatial_size != record.spatial_size:
        raise GapSimulationError(
            f"Mask pool size {pool.spatial_size} does not match sample size {record.spatial_size}",
            {"sample_id": record.sample_id},
        )
    length = record.length if valid_length is None else int(valid_length)
    pattern = sample_gap_pattern(spec, pool, length, rng)
    gaps = gap_mask_volume(pattern, record.length)
    masked, _ = imprint(record, gaps)
    logger.debug(
        f"Sample {record.sample_id}: masked frames {pattern.frames.tolist()} "
        f"with pool masks {pattern.mask_indices.tolist()}"
    )
    return masked, gaps


def _pad_spacing(days: np.ndarray) -> int:
    if days.shape[0] < 2:
        return DEFAULT_REVISIT_DAYS
    return max(1, int(round(float(np.median(np.diff(days))))))


def trim_or_pad(
    record: SampleRecord,
    length: int,
    rng: Optional[np.random.Generator] = None,
    mode: Literal["train", "eval"] = "train",
) -> TrimmedSequence:
    """
    Bring a record to exactly ``length`` frames.

    Longer sequences are cropped to a contiguous window, at a random offset in
    train mode and at the start in eval mode. Shorter sequences get no-data
    frames appended (images 1.0, mask 0) whose days continue at the median
    spacing of the observed days.

    Raises:
        GapSimulationError: Empty sequence, ``length`` < 1 or unknown mode
    """
    if length < 1:
        raise GapSimulationError(f"Target length must be >= 1, got {length}")
    if record.length == 0:
        raise GapSimulationError("Cannot trim or pad an empty sequence", {"sample_id": record.sample_id})
    if mode not in ("train", "eval"):
        raise GapSimulationError(f"Unknown trim mode: {mode}")

    if record.length >= length:
        start = 0
        if record.length > length and mode == "train":
            if rng is None:
                raise GapSimulationError("Random cropping requires an rng", {"sample_id": record.sample_id})
            start = int(rng.integers(0, record.length - length + 1))
        window = record if record.length == length else record.select_frames(range(start, start + length))
        return TrimmedSequence(
            record=window,
            pad_flags=np.zeros(length, dtype=bool),
            original_length=length,
            start=start,
        )

    missing = length - record.length
    _, channels, height, width = record.images.shape
    spacing = _pad_spacing(record.days)
    pad_days = record.days[-1] + spacing * np.arange(1, missing + 1, dtype=np.int64)
    padded = replace(
        record,
        images=np.concatenate(
            [record.images, np.ones((missing, channels, height, width), dtype=record.images.dtype)]
        ),
        mask=np.concatenate(
            [record.mask, np.zeros((missing, 1, height, width), dtype=record.mask.dtype)]
        ),
        days=np.concatenate([record.days, pad_days]),
    )
    pad_flags = np.zeros(length, dtype=bool)
    pad_flags[record.length :] = True
    return TrimmedSequence(record=padded, pad_flags=pad_flags, original_length=record.length)

