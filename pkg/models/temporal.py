import math
from typing import Tuple

import torch
from torch import nn

from core.exceptions import ModelShapeError

from .config import ModelConfig


class ChannelGroupedAttention(nn.Module):
    """
    Self-attention over time with data-driven queries.

    Each head owns a disjoint block of D/G channels. Queries and keys are
    per-head linear maps of that block; the softmax scores mix the block's
    normalized embeddings directly, so the output keeps one vector per frame.
    """

    def __init__(self, channels: int, num_heads: int, key_dim: int):
        super().__init__()
        if channels % num_heads:
            raise ModelShapeError(f"{channels} channels cannot be split into {num_heads} heads")
        self.num_heads = num_heads
        self.key_dim = key_dim
        self.group_channels = channels // num_heads
        self.query_weight = nn.Parameter(torch.empty(num_heads, self.group_channels, key_dim))
        self.query_bias = nn.Parameter(torch.zeros(num_heads, key_dim))
        self.key_weight = nn.Parameter(torch.empty(num_heads, self.group_channels, key_dim))
        self.key_bias = nn.Parameter(torch.zeros(num_heads, key_dim))
        bound = 1.0 / math.sqrt(self.group_channels)
        nn.init.uniform_(self.query_weight, -bound, bound)
        nn.init.uniform_(self.key_weight, -bound, bound)

    def forward(self, tokens: torch.Tensor) -> Tuple[torch.Tensor, torch.Tensor]:
        """
        Args:
            tokens: Normalized embeddings (N, T, D)

        Returns:
            Mixed embeddings (N, T, D) and scores (N, G, T, T), key axis last
        """
        count, length, _ = tokens.shape
        groups = tokens.reshape(count, length, self.num_heads, self.group_channels)
        queries = torch.einsum("ntgc,gck->ngtk", groups, self.query_weight) + self.query_bias[:, None]
        keys = torch.einsum("ntgc,gck->ngtk", groups, self.key_weight) + self.key_bias[:, None]
        scores = torch.einsum("ngtk,ngsk->ngts", queries, keys) / math.sqrt(self.key_dim)
        attention = torch.softmax(scores, dim=-1)
        mixed = torch.einsum("ngts,nsgc->ntgc", attention, groups)
        return mixed.reshape(count, length, -1), attention


class TemporalEncoder(nn.Module):
    """Pre-norm transformer layer applied independently at every bottleneck pixel."""

    def __init__(self, config: ModelConfig):
        super().__init__()
        channels = config.bottleneck_channels
        self.channels = channels
        self.attention_norm = nn.GroupNorm(config.norm_groups, channels)
        self.attention = ChannelGroupedAttention(channels, config.num_heads, config.key_dim)
        self.mlp_norm = nn.GroupNorm(config.norm_groups, channels)
        self.mlp = nn.Sequential(
            nn.Linear(channels, channels),
            nn.GELU(),
            nn.Linear(channels, channels),
        )

    @staticmethod
    def _normalize(norm: nn.GroupNorm, tokens: torch.Tensor) -> torch.Tensor:
        count, length, channels = tokens.shape
        return norm(tokens.reshape(count * length, channels)).reshape(count, length, channels)

    def forward(
        self, bottleneck: torch.Tensor, encoding: torch.Tensor
    ) -> Tuple[torch.Tensor, torch.Tensor]:
        """
        Refine the bottleneck along time.

        Args:
            bottleneck: (B, T, D, h, w)
            encoding: Positional encoding (B, T, D), added before attention

        Returns:
            Refined bottleneck (B, T, D, h, w) and attention (B, G, T, T, h, w)
        """
        if bottleneck.dim() != 5 or bottleneck.shape[2] != self.channels:
            raise ModelShapeError(
                f"Expected (B, T, {self.channels}, h, w) bottleneck, got {tuple(bottleneck.shape)}"
            )
        batch, length, channels, height, width = bottleneck.shape
        if encoding.shape != (batch, length, channels):
            raise ModelShapeError(
                f"Positional encoding shape {tuple(encoding.shape)} does not match "
                f"({batch}, {length}, {channels})"
            )

        x = bottleneck + encoding[..., None, None].to(bottleneck.dtype)
        tokens = x.permute(0, 3, 4, 1, 2).reshape(batch * height * width, length, channels)

        mixed, attention = self.attention(self._normalize(self.attention_norm, tokens))
        tokens = tokens + mixed
        tokens = tokens + self.mlp(self._normalize(self.mlp_norm, tokens))

        refined = tokens.reshape(batch, height, width, length, channels).permute(0, 3, 4, 1, 2)
        heads = attention.shape[1]
        attention = attention.reshape(batch, height, width, heads, length, length)
        return refined.contiguous(), attention.permute(0, 3, 4, 5, 1, 2).contiguous()
