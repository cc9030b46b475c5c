from typing import Optional, Sequence

import torch

from core.exceptions import TrainingError


def pad_flags_from_lengths(lengths: Sequence[int], window: int) -> torch.Tensor:
    """Boolean (B, T) pad flags for sequences of the given real lengths."""
    steps = torch.arange(window)
    return steps[None, :] >= torch.as_tensor(list(lengths))[:, None]


def sequence_l1_loss(
    prediction: torch.Tensor,
    target: torch.Tensor,
    pad_flags: Optional[torch.Tensor] = None,
) -> torch.Tensor:
    """
    Masked L1 objective over imputed sequences.

    Each sequence contributes the mean absolute error over its real frames,
    all channels and all pixels (observed and imputed alike); the batch loss
    is the mean over sequences. Pad frames never contribute, whatever they
    hold.

    Args:
        prediction: (B, T, C, H, W)
        target: (B, T, C, H, W)
        pad_flags: Boolean (B, T), True for pad frames; None means no padding

    Returns:
        Scalar loss

    Raises:
        TrainingError: On shape mismatch or a sequence without real frames
    """
    if prediction.shape != target.shape:
        raise TrainingError(
            f"Prediction shape {tuple(prediction.shape)} differs from target {tuple(target.shape)}"
        )
    batch, length = prediction.shape[:2]
    if pad_flags is None:
        pad_flags = torch.zeros(batch, length, dtype=torch.bool, device=prediction.device)
    pad_flags = pad_flags.to(device=prediction.device, dtype=torch.bool)
    if pad_flags.shape != (batch, length):
        raise TrainingError(f"Pad flags shape {tuple(pad_flags.shape)} does not match ({batch}, {length})")

    real = (~pad_flags).to(prediction.dtype)
    effective_lengths = real.sum(dim=1)
    if torch.any(effective_lengths == 0):
        raise TrainingError("Sequence with zero effective length in loss batch")

    per_frame = (prediction - target).abs().flatten(start_dim=2).mean(dim=2)
    # where() keeps non-finite pad content out of the sum
    per_frame = torch.where(pad_flags, torch.zeros_like(per_frame), per_frame)
    per_sequence = per_frame.sum(dim=1) / effective_lengths
    return per_sequence.mean()
