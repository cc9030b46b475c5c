"""Temporal-attention U-Net for sequence imputation."""

from .checkpoint import checkpoint_id, load_checkpoint, save_checkpoint
from .config import ModelConfig
from .network import TemporalAttentionUNet, build_model, forward_record
from .positional_encoding import positional_encoding
from .skips import WeightedSkip, temporal_weighting, upsample_attention

__all__ = [
    "ModelConfig",
    "TemporalAttentionUNet",
    "build_model",
    "forward_record",
    "positional_encoding",
    "WeightedSkip",
    "temporal_weighting",
    "upsample_attention",
    "checkpoint_id",
    "load_checkpoint",
    "save_checkpoint",
]
