from dataclasses import dataclass
from typing import Sequence, TypeVar

import numpy as np
import torch

from core.exceptions import AugmentationError

ROTATIONS = (0, 1, 2, 3)

ArrayLike = TypeVar("ArrayLike", np.ndarray, torch.Tensor)


@dataclass(frozen=True)
class Augmentation:
    """Rotation by ``quarter_turns`` × 90° followed by optional flips."""

    quarter_turns: int = 0
    flip_x: bool = False
    flip_y: bool = False


def sample_augmentation(
    rng: np.random.Generator, rotations: Sequence[int] = ROTATIONS
) -> Augmentation:
    """Draw one rotation uniformly from ``rotations`` and two fair flip decisions."""
    quarter_turns = int(rotations[int(rng.integers(0, len(rotations)))])
    flip_x, flip_y = (bool(v) for v in rng.integers(0, 2, size=2))
    return Augmentation(quarter_turns=quarter_turns, flip_x=flip_x, flip_y=flip_y)


def apply_augmentation(volume: ArrayLike, augmentation: Augmentation) -> ArrayLike:
    """
    Apply an augmentation to the two trailing (spatial) axes.

    Works on numpy arrays and torch tensors alike; every leading axis (time,
    channel) receives the same transform.

    Raises:
        AugmentationError: Quarter or three-quarter turn of non-square frames
    """
    height, width = volume.shape[-2:]
    if augmentation.quarter_turns % 2 and height != width:
        raise AugmentationError(
            f"Cannot rotate {height}×{width} frames by {90 * augmentation.quarter_turns}°"
        )
    if isinstance(volume, torch.Tensor):
        out = torch.rot90(volume, augmentation.quarter_turns % 4, dims=(-2, -1))
        if augmentation.flip_x:
            out = torch.flip(out, dims=(-1,))
        if augmentation.flip_y:
            out = torch.flip(out, dims=(-2,))
        return out.contiguous()
    out = np.rot90(volume, augmentation.quarter_turns % 4, axes=(-2, -1))
    if augmentation.flip_x:
        out = np.flip(out, axis=-1)
    if augmentation.flip_y:
        out = np.flip(out, axis=-2)
    return np.ascontiguousarray(out)
