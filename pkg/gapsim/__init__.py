"""Cloud filtering, gap simulation and synthetic scene generation."""

from .cloud_filter import CloudFilterResult, filter_cloudy_frames, trim_long_gaps
from .gaps import (
    GapPattern,
    GapSpec,
    MaskPool,
    TrimmedSequence,
    gap_mask_volume,
    imprint,
    sample_gap_pattern,
    simulate_gaps,
    trim_or_pad,
)
from .synthetic import (
    SyntheticSceneParams,
    build_blob_mask_pool,
    generate_blob_mask,
    generate_synthetic_scene,
)

__all__ = [
    "CloudFilterResult",
    "filter_cloudy_frames",
    "trim_long_gaps",
    "GapPattern",
    "GapSpec",
    "MaskPool",
    "TrimmedSequence",
    "gap_mask_volume",
    "imprint",
    "sample_gap_pattern",
    "simulate_gaps",
    "trim_or_pad",
    "SyntheticSceneParams",
    "build_blob_mask_pool",
    "generate_blob_mask",
    "generate_synthetic_scene",
]
