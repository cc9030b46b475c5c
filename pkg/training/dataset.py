import hashlib
import logging
from typing import Any, Dict, Literal, Sequence

import numpy as np
from torch.utils.data import Dataset

from core.datamodel import SampleRecord
from core.exceptions import TrainingError
from gapsim.gaps import GapSpec, MaskPool, simulate_gaps, trim_or_pad

from .augment import ROTATIONS, apply_augmentation, sample_augmentation

logger = logging.getLogger(__name__)


def stable_hash(text: str) -> int:
    """Process-independent 63-bit hash of a string."""
    return int.from_bytes(hashlib.sha256(text.encode("utf-8")).digest()[:8], "little") >> 1


class GapSimulatedDataset(Dataset):
    """
    Clean sequences turned into (imprinted input, clean target) pairs on access.

    Every item draws from its own rng seeded with (seed, epoch, sample id), so
    workers need no shared state. In ``train`` mode the epoch changes the
    crop, the gaps and the augmentation; in ``eval`` mode the epoch is
    ignored and each sample always gets the same gaps.
    """

    def __init__(
        self,
        records: Sequence[SampleRecord],
        spec: GapSpec,
        pool: MaskPool,
        window_length: int,
        mode: Literal["train", "eval"] = "train",
        seed: int = 0,
        augment: bool = True,
    ):
        if not records:
            raise TrainingError(f"Empty {mode} split")
        self.records = list(records)
        self.spec = spec
        self.pool = pool
        self.window_length = window_length
        self.mode = mode
        self.seed = seed
        self.augment = augment and mode == "train"
        self.epoch = 0

        height, width = self.records[0].spatial_size
        self.rotations = ROTATIONS if height == width else (0, 2)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def sample_ids(self) -> Sequence[str]:
        return [record.sample_id for record in self.records]

    def set_epoch(self, epoch: int) -> None:
        self.epoch = epoch

    def item_rng(self, index: int) -> np.random.Generator:
        epoch = self.epoch if self.mode == "train" else 0
        return np.random.default_rng(
            [self.seed, epoch, stable_hash(self.records[index].sample_id)]
        )

    def __getitem__(self, index: int) -> Dict[str, Any]:
        record = self.records[index]
        rng = self.item_rng(index)

        trimmed = trim_or_pad(record, self.window_length, rng, self.mode)
        masked, _ = simulate_gaps(
            trimmed.record, self.spec, self.pool, rng, valid_length=trimmed.original_length
        )
        images = masked.images
        mask = masked.mask
        target = trimmed.record.reconstruct_images()

        if self.augment:
            augmentation = sample_augmentation(rng, self.rotations)
            images = apply_augmentation(images, augmentation)
            mask = apply_augmentation(mask, augmentation)
            target = apply_augmentation(target, augmentation)

        return {
            "images": np.ascontiguousarray(images, dtype=np.float32),
            "target": np.ascontiguousarray(target, dtype=np.float32),
            "mask": np.ascontiguousarray(mask, dtype=np.uint8),
            "days": np.asarray(masked.days, dtype=np.int64),
            "pad_flags": trimmed.pad_flags,
            "sample_id": record.sample_id,
        }
