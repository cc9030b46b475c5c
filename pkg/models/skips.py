from typing import Tuple

import torch
import torch.nn.functional as F
from torch import nn

from core.exceptions import ModelShapeError


def upsample_attention(attention: torch.Tensor, size: Tuple[int, int]) -> torch.Tensor:
    """
    Bilinearly upsample attention masks to a pyramid level's resolution.

    Interpolation is linear with weights summing to one, so the sum over key
    frames stays 1 at every output pixel.

    Args:
        attention: (B, G, T, T, h, w)
        size: Target (H_l, W_l)

    Returns:
        (B, G, T, T, H_l, W_l)
    """
    if attention.dim() != 6:
        raise ModelShapeError(f"Expected (B, G, T, T, h, w) attention, got {tuple(attention.shape)}")
    if tuple(attention.shape[-2:]) == tuple(size):
        return attention
    leading = attention.shape[:-2]
    flat = attention.reshape(-1, 1, *attention.shape[-2:])
    upsampled = F.interpolate(flat, size=tuple(size), mode="bilinear", align_corners=False)
    return upsampled.reshape(*leading, *size)


def temporal_weighting(features: torch.Tensor, attention: torch.Tensor) -> torch.Tensor:
    """
    Mix per-frame features with the head-averaged attention masks.

    ``out[b, t, c, x, y] = sum_k mean_g(attention[b, g, t, k, x, y]) * features[b, k, c, x, y]``

    Args:
        features: (B, T, C, H, W)
        attention: (B, G, T, T, H, W), already at the features' resolution

    Returns:
        (B, T, C, H, W)
    """
    batch, length, _, height, width = features.shape
    if attention.shape[0] != batch or attention.shape[2:] != (length, length, height, width):
        raise ModelShapeError(
            f"Attention {tuple(attention.shape)} does not fit features {tuple(features.shape)}"
        )
    mask = attention.mean(dim=1)
    return torch.einsum("btkxy,bkcxy->btcxy", mask, features)


class WeightedSkip(nn.Module):
    """Attention-weighted skip connection followed by a shared 1×1 conv and ReLU."""

    def __init__(self, channels: int):
        super().__init__()
        self.projection = nn.Conv2d(channels, channels, kernel_size=1)

    def forward(self, features: torch.Tensor, attention: torch.Tensor) -> torch.Tensor:
        """
        Args:
            features: Pyramid level (B, T, C, H_l, W_l)
            attention: Bottleneck attention (B, G, T, T, h, w)

        Returns:
            Skip volume (B, T, C, H_l, W_l)
        """
        weighted = temporal_weighting(features, upsample_attention(attention, features.shape[-2:]))
        batch, length = weighted.shape[:2]
        projected = F.relu(self.projection(weighted.reshape(batch * length, *weighted.shape[2:])))
        return projected.reshape(batch, length, *projected.shape[1:])
