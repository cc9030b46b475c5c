from dataclasses import dataclass
from typing import List, Tuple

import numpy as np


@dataclass(frozen=True)
class WindowPlan:
    """Decomposition of a sequence into network-sized windows.

    Attributes:
        length: Number of frames of the full sequence
        window_length: Frames per forward pass
        windows: Half-open (start, end) frame ranges covering the sequence
        assignment: For every frame, the index of the window its output is
            taken from
    """

    length: int
    window_length: int
    windows: Tuple[Tuple[int, int], ...]
    assignment: np.ndarray

    @property
    def num_windows(self) -> int:
        return len(self.windows)

    def frames_of(self, window_index: int) -> List[int]:
        """Frames whose output comes from the given window."""
        return [int(t) for t in np.flatnonzero(self.assignment == window_index)]

    def as_dict(self) -> dict:
        return {
            "length": self.length,
            "window_length": self.window_length,
            "windows": [list(w) for w in self.windows],
            "assignment": [int(a) for a in self.assignment],
        }


def plan_windows(length: int, window_length: int) -> WindowPlan:
    """
    Plan the forward passes needed to impute a sequence of ``length`` frames.

    Sequences that fit are processed in one shot. Longer ones are covered by
    windows of ``window_length`` frames advancing by half a window, the last
    window right-aligned with the end. Each frame is taken from the window
    whose center is nearest, the earlier window on ties.

    Raises:
        ValueError: Non-positive length or window length
    """
    if length < 1 or window_length < 1:
        raise ValueError(
            f"Sequence and window lengths must be >= 1, got {length} and {window_length}"
        )
    if length <= window_length:
        return WindowPlan(length, window_length, ((0, length),), np.zeros(length, dtype=np.int64))

    stride = -(-window_length // 2)
    starts = list(range(0, length - window_length + 1, stride))
    if starts[-1] + window_length < length:
        starts.append(length - window_length)
    windows = tuple((s, s + window_length) for s in starts)

    frames = np.arange(length)
    # doubled distances keep half-frame centers integral
    centers = np.array([s + e - 1 for s, e in windows])
    distance = np.abs(2 * frames[:, None] - centers[None, :])
    inside = (frames[:, None] >= np.array(starts)[None, :]) & (
        frames[:, None] < np.array([e for _, e in windows])[None, :]
    )
    distance = np.where(inside, distance, np.iinfo(np.int64).max)
    assignment = np.argmin(distance, axis=1).astype(np.int64)
    return WindowPlan(length, window_length, windows, assignment)
