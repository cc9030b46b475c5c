import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from core.datamodel import SampleRecord
from core.exceptions import GapSimulationError

logger = logging.getLogger(__name__)

DEFAULT_CLOUD_THRESHOLD = 0.01
MIN_CLEAN_FRAMES = 5
MAX_SPACING_DAYS = 28

REJECT_TOO_SHORT = "too short"


@dataclass(frozen=True)
class CloudFilterResult:
    """Outcome of :func:`filter_cloudy_frames`.

    ``record`` is None when the sequence was rejected; ``reason`` says why.
    """

    record: Optional[SampleRecord]
    kept_frames: Tuple[int, ...]
    reason: Optional[str] = None

    @property
    def rejected(self) -> bool:
        return self.record is None


def filter_cloudy_frames(
    record: SampleRecord,
    cloud_score: np.ndarray,
    threshold: float = DEFAULT_CLOUD_THRESHOLD,
    min_frames: int = MIN_CLEAN_FRAMES,
) -> CloudFilterResult:
    """
    Keep only the frames without a single cloudy or missing pixel.

    A pixel is cloudy when its score exceeds ``threshold``; binary masks
    (1 = cloud) therefore work with the default threshold too. Pixels the
    record already marks invalid also disqualify their frame.

    Args:
        record: Sequence to filter
        cloud_score: Per-pixel cloud probability or binary cloud mask, shaped
            (T, 1, H, W) or (T, H, W)
        threshold: Cloud probability above which a pixel is cloudy
        min_frames: Minimum number of surviving frames

    Returns:
        CloudFilterResult with the filtered record, or a rejection with reason
        ``"too short"``

    Raises:
        GapSimulationError: If ``cloud_score`` is not aligned with the record
    """
    scores = np.asarray(cloud_score, dtype=np.float64)
    if scores.ndim == 3:
        scores = scores[:, None]
    if scores.shape != record.mask.shape:
        raise GapSimulationError(
            f"Cloud score shape {np.shape(cloud_score)} does not match record frames {record.mask.shape}",
            {"sample_id": record.sample_id},
        )

    cloudy = (scores[:, 0] > threshold) | (record.mask[:, 0] == 0)
    clean = ~cloudy.reshape(record.length, -1).any(axis=1)
    kept = tuple(int(t) for t in np.flatnonzero(clean))

    if len(kept) < min_frames:
        logger.warning(
            f"Rejected sample {record.sample_id}: {len(kept)} clean frames, {min_frames} required"
        )
        return CloudFilterResult(record=None, kept_frames=kept, reason=REJECT_TOO_SHORT)

    if len(kept) == record.length:
        return CloudFilterResult(record=record, kept_frames=kept)
    return CloudFilterResult(record=record.select_frames(kept), kept_frames=kept)


def trim_long_gaps(record: SampleRecord, max_spacing_days: int = MAX_SPACING_DAYS) -> SampleRecord:
    """
    Keep the longest run of frames whose consecutive spacing stays within
    ``max_spacing_days``. The earliest run wins a tie.
    """
    if record.length < 2:
        return record
    breaks = np.flatnonzero(np.diff(record.days) > max_spacing_days) + 1
    starts = np.concatenate([[0], breaks])
    ends = np.concatenate([breaks, [record.length]])
    best = int(np.argmax(ends - starts))
    start, end = int(starts[best]), int(ends[best])
    if end - start == record.length:
        return record
    logger.debug(
        f"Sample {record.sample_id}: kept frames {start}..{end - 1} of {record.length} "
        f"(spacing limit {max_spacing_days} days)"
    )
    return record.select_frames(range(start, end))
