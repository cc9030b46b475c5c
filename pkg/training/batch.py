from dataclasses import dataclass
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np
import torch


@dataclass(frozen=True)
class TrainingBatch:
    """A collated batch of gap-simulated sequences.

    Attributes:
        images: Imprinted input (B, T, C_in, H, W)
        target: Clean reconstruct channels (B, T, C_out, H, W)
        mask: Input validity (B, T, 1, H, W), 1 = observed
        days: Acquisition days (B, T)
        pad_flags: Boolean (B, T), True for pad frames
        sample_ids: One id per sequence
    """

    images: torch.Tensor
    target: torch.Tensor
    mask: torch.Tensor
    days: torch.Tensor
    pad_flags: torch.Tensor
    sample_ids: Tuple[str, ...]

    def __len__(self) -> int:
        return int(self.images.shape[0])

    def to(self, device: torch.device, dtype: torch.dtype = torch.float32) -> "TrainingBatch":
        return TrainingBatch(
            images=self.images.to(device=device, dtype=dtype),
            target=self.target.to(device=device, dtype=dtype),
            mask=self.mask.to(device=device),
            days=self.days.to(device=device),
            pad_flags=self.pad_flags.to(device=device),
            sample_ids=self.sample_ids,
        )


def collate_sequences(items: Sequence[Dict[str, Any]]) -> TrainingBatch:
    """``collate_fn`` stacking dataset items into a :class:`TrainingBatch`."""

    def stack(key: str) -> torch.Tensor:
        return torch.from_numpy(np.stack([item[key] for item in items]))

    sample_ids: List[str] = [item["sample_id"] for item in items]
    return TrainingBatch(
        images=stack("images"),
        target=stack("target"),
        mask=stack("mask"),
        days=stack("days"),
        pad_flags=stack("pad_flags"),
        sample_ids=tuple(sample_ids),
    )
