import logging
from typing import List, Optional, Tuple

import numpy as np
import torch
from torch import nn

from core.datamodel import SampleRecord
from core.exceptions import ModelShapeError

from .config import ModelConfig
from .positional_encoding import positional_encoding
from .skips import WeightedSkip
from .spatial import SpatialDecoder, SpatialEncoder
from .temporal import TemporalEncoder

logger = logging.getLogger(__name__)


class TemporalAttentionUNet(nn.Module):
    """
    Sequence-to-sequence imputation network.

    Frames are encoded independently by a convolutional encoder; a temporal
    self-attention layer refines the bottleneck; the attention masks,
    upsampled, weight the skip connections of a convolutional decoder that
    regresses every frame in (0, 1).
    """

    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        self.encoder = SpatialEncoder(config)
        self.temporal = TemporalEncoder(config) if config.temporal_encoder else None
        if config.temporal_encoder and config.skip_mode == "weighted":
            self.skips = nn.ModuleList(WeightedSkip(c) for c in config.level_channels()[:-1])
        else:
            self.skips = None
        self.decoder = SpatialDecoder(config)
        self._init_weights()

    def _init_weights(self) -> None:
        for module in self.modules():
            if isinstance(module, (nn.Conv2d, nn.ConvTranspose2d, nn.Linear)):
                nn.init.kaiming_uniform_(module.weight, nonlinearity="relu")
                if module.bias is not None:
                    nn.init.zeros_(module.bias)
            elif isinstance(module, nn.GroupNorm):
                nn.init.ones_(module.weight)
                nn.init.zeros_(module.bias)

    def encode(self, images: torch.Tensor) -> Tuple[torch.Tensor, List[torch.Tensor]]:
        """Spatial encoding: bottleneck (B, T, D, h, w) and the full pyramid."""
        pyramid = self.encoder(images)
        return pyramid[-1], pyramid

    def identity_attention(
        self, batch: int, length: int, height: int, width: int, like: torch.Tensor
    ) -> torch.Tensor:
        eye = torch.eye(length, dtype=like.dtype, device=like.device)
        return eye[None, None, :, :, None, None].expand(
            batch, self.config.num_heads, length, length, height, width
        ).clone()

    def forward(
        self, images: torch.Tensor, days: torch.Tensor
    ) -> Tuple[torch.Tensor, torch.Tensor]:
        """
        Impute a batch of imprinted sequences.

        Args:
            images: (B, T, C_in, H, W) with gaps at value 1
            days: (B, T) integer acquisition days

        Returns:
            Prediction (B, T, C_out, H, W) and attention (B, G, T, T, h, w)
        """
        if days.shape != images.shape[:2]:
            raise ModelShapeError(
                f"Days shape {tuple(days.shape)} does not match images {tuple(images.shape[:2])}"
            )
        bottleneck, pyramid = self.encode(images)
        batch, length, _, height, width = bottleneck.shape

        if self.temporal is None:
            refined = bottleneck
            attention = self.identity_attention(batch, length, height, width, bottleneck)
        else:
            encoding = positional_encoding(
                days, self.config.bottleneck_channels, self.config.tau, self.config.positional_encoding
            )
            refined, attention = self.temporal(bottleneck, encoding)

        levels = pyramid[:-1]
        if self.skips is None:
            skips = levels
        else:
            skips = [skip(features, attention) for skip, features in zip(self.skips, levels)]
        return self.decoder(refined, skips), attention


def build_model(config: ModelConfig, seed: Optional[int] = None) -> TemporalAttentionUNet:
    """Instantiate a network, seeding torch first when ``seed`` is given."""
    if seed is not None:
        torch.manual_seed(seed)
    model = TemporalAttentionUNet(config)
    parameters = sum(p.numel() for p in model.parameters())
    logger.debug(f"Built network with {parameters} parameters ({config.model_dump()})")
    return model


def forward_record(
    model: TemporalAttentionUNet, record: SampleRecord
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Run the network on one imprinted record in eval mode.

    Returns:
        Prediction (T, C_out, H, W) and attention (G, T, T, h, w) as float32
        arrays
    """
    if record.num_channels != model.config.input_channels:
        raise ModelShapeError(
            f"Record has {record.num_channels} channels, network expects "
            f"{model.config.input_channels}",
            {"sample_id": record.sample_id},
        )
    device = next(model.parameters()).device
    dtype = next(model.parameters()).dtype
    images = torch.from_numpy(record.images).to(device=device, dtype=dtype)[None]
    days = torch.from_numpy(np.asarray(record.days, dtype=np.int64)).to(device)[None]
    was_training = model.training
    model.eval()
    try:
        with torch.no_grad():
            prediction, attention = model(images, days)
    finally:
        model.train(was_training)
    return (
        prediction[0].cpu().to(torch.float32).numpy(),
        attention[0].cpu().to(torch.float32).numpy(),
    )
