"""Per-frame convolutional encoder and decoder. Frames share weights; the
time axis is folded into the batch axis."""

from typing import List, Sequence, Tuple

import torch
import torch.nn.functional as F
from torch import nn

from core.exceptions import ModelShapeError

from .config import ModelConfig


class ConvBlock(nn.Module):
    """Two 3×3 convolutions; the second is residual on the first."""

    def __init__(self, in_channels: int, out_channels: int):
        super().__init__()
        self.conv1 = nn.Conv2d(in_channels, out_channels, kernel_size=3, padding=1)
        self.conv2 = nn.Conv2d(out_channels, out_channels, kernel_size=3, padding=1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        hidden = F.relu(self.conv1(x))
        return F.relu(self.conv2(hidden) + hidden)


class DownBlock(nn.Module):
    def __init__(self, in_channels: int, out_channels: int):
        super().__init__()
        self.down = nn.Conv2d(in_channels, out_channels, kernel_size=3, stride=2, padding=1)
        self.block = ConvBlock(out_channels, out_channels)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.block(F.relu(self.down(x)))


class UpBlock(nn.Module):
    def __init__(self, in_channels: int, skip_channels: int, out_channels: int):
        super().__init__()
        self.up = nn.ConvTranspose2d(in_channels, out_channels, kernel_size=4, stride=2, padding=1)
        self.block = ConvBlock(out_channels + skip_channels, out_channels)

    def forward(self, x: torch.Tensor, skip: torch.Tensor) -> torch.Tensor:
        return self.block(torch.cat([F.relu(self.up(x)), skip], dim=1))


def _fold(x: torch.Tensor) -> Tuple[torch.Tensor, int, int]:
    batch, length = x.shape[:2]
    return x.reshape(batch * length, *x.shape[2:]), batch, length


def _unfold(x: torch.Tensor, batch: int, length: int) -> torch.Tensor:
    return x.reshape(batch, length, *x.shape[1:])


class SpatialEncoder(nn.Module):
    """Multi-scale per-frame encoder producing the feature pyramid."""

    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        channels = config.level_channels()
        self.stem = ConvBlock(config.input_channels, channels[0])
        self.levels = nn.ModuleList(
            DownBlock(channels[level - 1], channels[level]) for level in range(1, len(channels))
        )

    def forward(self, images: torch.Tensor) -> List[torch.Tensor]:
        """
        Encode every frame.

        Args:
            images: (B, T, C_in, H, W)

        Returns:
            Feature pyramid, level 0 (full resolution) to level L (bottleneck),
            each shaped (B, T, d_l, H / 2^l, W / 2^l)
        """
        if images.dim() != 5 or images.shape[2] != self.config.input_channels:
            raise ModelShapeError(
                f"Expected (B, T, {self.config.input_channels}, H, W) input, got {tuple(images.shape)}"
            )
        self.config.bottleneck_size(images.shape[-2], images.shape[-1])

        x, batch, length = _fold(images)
        x = self.stem(x)
        pyramid = [_unfold(x, batch, length)]
        for level in self.levels:
            x = level(x)
            pyramid.append(_unfold(x, batch, length))
        return pyramid


class SpatialDecoder(nn.Module):
    """Mirrored per-frame decoder ending in a sigmoid regression head."""

    def __init__(self, config: ModelConfig):
        super().__init__()
        channels = config.level_channels()
        self.levels = nn.ModuleList()
        in_channels = channels[-1]
        for level in reversed(range(config.num_levels)):
            self.levels.append(UpBlock(in_channels, channels[level], channels[level]))
            in_channels = channels[level]
        self.head = nn.Conv2d(in_channels, config.output_channels, kernel_size=3, padding=1)

    def forward(self, bottleneck: torch.Tensor, skips: Sequence[torch.Tensor]) -> torch.Tensor:
        """
        Decode the refined bottleneck.

        Args:
            bottleneck: (B, T, D, h, w)
            skips: Skip volumes for levels 0..L-1, full resolution first

        Returns:
            (B, T, C_out, H, W) with values in (0, 1)
        """
        if len(skips) != len(self.levels):
            raise ModelShapeError(f"Decoder needs {len(self.levels)} skip levels, got {len(skips)}")
        x, batch, length = _fold(bottleneck)
        for up, skip in zip(self.levels, reversed(skips)):
            folded_skip, _, _ = _fold(skip)
            if folded_skip.shape[-2:] != (x.shape[-2] * 2, x.shape[-1] * 2):
                raise ModelShapeError(
                    f"Skip of size {tuple(folded_skip.shape[-2:])} does not match "
                    f"decoder level of size {tuple(x.shape[-2:])}"
                )
            x = up(x, folded_skip)
        return _unfold(torch.sigmoid(self.head(x)), batch, length)
