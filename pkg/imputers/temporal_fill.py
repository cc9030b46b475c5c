"""Per-pixel temporal gap filling shared by the non-learned imputers.

Every spatial location and channel is treated as an independent time line.
For each frame the nearest valid observation before and after it is located
with running max/min scans over frame indices; the three methods only differ
in how they combine the two neighbours.
"""

import logging
from dataclasses import dataclass
from typing import Literal, Tuple

import numpy as np

from core.datamodel import SampleRecord

logger = logging.getLogger(__name__)

FillMethod = Literal["last", "closest", "linear"]


@dataclass(frozen=True)
class Neighbours:
    """Indices of the nearest valid frames around every (t, y, x).

    ``previous`` is -1 and ``following`` is T where no such frame exists.
    Valid positions are their own neighbours.
    """

    previous: np.ndarray
    following: np.ndarray
    unfilled: np.ndarray


def find_neighbours(valid: np.ndarray) -> Neighbours:
    """
    Args:
        valid: Boolean (T, H, W) map of valid observations

    Returns:
        Neighbours with int64 (T, H, W) index volumes and the (H, W) map of
        time lines without any valid observation
    """
    length = valid.shape[0]
    frames = np.arange(length, dtype=np.int64)[:, None, None]
    previous = np.maximum.accumulate(np.where(valid, frames, -1), axis=0)
    following = np.minimum.accumulate(np.where(valid, frames, length)[::-1], axis=0)[::-1]
    return Neighbours(previous=previous, following=following, unfilled=~valid.any(axis=0))


def _gather(volume: np.ndarray, index: np.ndarray) -> np.ndarray:
    safe = np.clip(index, 0, volume.shape[0] - 1)[:, None]
    return np.take_along_axis(volume, safe, axis=0)


def fill_gaps(record: SampleRecord, method: FillMethod) -> Tuple[np.ndarray, np.ndarray]:
    """
    Fill the missing pixels of the reconstruct channels.

    Gaps before the first or after the last valid observation take the
    nearest valid value for every method. Valid pixels are returned
    unchanged. Time lines without any valid observation keep their input
    values and are flagged.

    Args:
        record: Imprinted record
        method: ``last``, ``closest`` or ``linear``

    Returns:
        Filled (T, C_out, H, W) volume, float64 for ``linear`` and in the
        input dtype for the copying methods, and the (H, W) unfilled map

    Raises:
        ValueError: Unknown method
    """
    if method not in ("last", "closest", "linear"):
        raise ValueError(f"Unknown fill method: {method}")

    images = record.reconstruct_images()
    valid = record.valid_pixels()
    neighbours = find_neighbours(valid)
    previous, following = neighbours.previous, neighbours.following
    has_previous = previous >= 0
    has_following = following < record.length

    if method == "last":
        source = np.where(has_previous, previous, following)
        filled = _gather(images, source)
    elif method == "closest":
        days = np.asarray(record.days, dtype=np.int64)
        frame_days = days[:, None, None]
        before = frame_days - days[np.clip(previous, 0, record.length - 1)]
        after = days[np.clip(following, 0, record.length - 1)] - frame_days
        take_previous = has_previous & (~has_following | (before <= after))
        source = np.where(take_previous, previous, following)
        filled = _gather(images, source)
    else:
        days = np.asarray(record.days, dtype=np.float64)
        start = np.where(has_previous, previous, following)
        end = np.where(has_following, following, previous)
        v0 = _gather(images, start).astype(np.float64)
        v1 = _gather(images, end).astype(np.float64)
        t0 = days[np.clip(start, 0, record.length - 1)]
        t1 = days[np.clip(end, 0, record.length - 1)]
        span = t1 - t0
        weight = np.divide(
            days[:, None, None] - t0, span, out=np.zeros_like(span), where=span > 0
        )
        filled = v0 + weight[:, None] * (v1 - v0)

    filled = np.where(valid[:, None], images, filled)
    if neighbours.unfilled.any():
        filled = np.where(neighbours.unfilled[None, None], images, filled)
        logger.warning(
            f"{int(neighbours.unfilled.sum())} pixel(s) of {record.sample_id} have no "
            f"valid observation and were left unfilled"
        )
    return np.ascontiguousarray(filled), neighbours.unfilled
