from typing import Literal, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from core.exceptions import ModelShapeError

PositionalEncodingMode = Literal["day_of_year", "day_in_sequence", "enumeration", "none"]
SkipMode = Literal["weighted", "ordinary"]


class ModelConfig(BaseModel):
    """Architecture hyper-parameters of :class:`TemporalAttentionUNet`.

    Attributes:
        input_channels: Channels fed to the encoder (reconstruct + auxiliary)
        output_channels: Reconstruct channels regressed by the decoder
        base_channels: Filters of every encoder/decoder level above the bottleneck
        bottleneck_channels: Latent depth at the bottleneck
        num_levels: Number of stride-2 downsamplings
        num_heads: Attention heads, each owning a disjoint channel block
        key_dim: Key/query dimension per head
        positional_encoding: How acquisition days enter the attention
        tau: Wavelength base of the sinusoidal encoding
        temporal_encoder: False gives a per-frame network without attention
        skip_mode: ``weighted`` mixes skip features with the attention masks
        norm_groups: Group count of the normalizations in the temporal encoder
    """

    model_config = ConfigDict(extra="forbid")

    input_channels: int = Field(4, ge=1)
    output_channels: int = Field(4, ge=1)
    base_channels: int = Field(64, ge=1)
    bottleneck_channels: int = Field(128, ge=1)
    num_levels: int = Field(3, ge=1)
    num_heads: int = Field(4, ge=1)
    key_dim: int = Field(4, ge=1)
    positional_encoding: PositionalEncodingMode = "day_of_year"
    tau: float = Field(1000.0, gt=0.0)
    temporal_encoder: bool = True
    skip_mode: SkipMode = "weighted"
    norm_groups: int = Field(4, ge=1)

    @model_validator(mode="after")
    def _check_consistency(self):
        if self.bottleneck_channels % self.num_heads:
            raise ValueError(
                f"bottleneck_channels ({self.bottleneck_channels}) must be divisible "
                f"by num_heads ({self.num_heads})"
            )
        if self.bottleneck_channels % self.norm_groups:
            raise ValueError(
                f"bottleneck_channels ({self.bottleneck_channels}) must be divisible "
                f"by norm_groups ({self.norm_groups})"
            )
        if self.output_channels > self.input_channels:
            raise ValueError("output_channels must not exceed input_channels")
        return self

    @property
    def downsampling_factor(self) -> int:
        return 2**self.num_levels

    def level_channels(self) -> Tuple[int, ...]:
        """Channel count of each pyramid level, full resolution first."""
        return (self.base_channels,) * self.num_levels + (self.bottleneck_channels,)

    def bottleneck_size(self, height: int, width: int) -> Tuple[int, int]:
        """
        Spatial size at the bottleneck.

        Raises:
            ModelShapeError: If the frame size is not divisible by 2^num_levels
        """
        factor = self.downsampling_factor
        if height % factor or width % factor:
            raise ModelShapeError(
                f"Frame size {height}×{width} is not divisible by {factor} "
                f"({self.num_levels} downsampling levels)"
            )
        return height // factor, width // factor
