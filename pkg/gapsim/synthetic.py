"""Procedural scenes with land-cover segments, seasonal dynamics and abrupt
events, plus blob-shaped gap masks. Used wherever real imagery is absent."""

import logging
from typing import List, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy.ndimage import gaussian_filter, label

from core.datamodel import AUXILIARY, RECONSTRUCT, SampleRecord, make_record
from core.exceptions import GapSimulationError
from gapsim.gaps import MaskPool

logger = logging.getLogger(__name__)

DAYS_PER_YEAR = 365.0


class SyntheticSceneParams(BaseModel):
    """Parameters of one procedurally generated scene."""

    model_config = ConfigDict(extra="forbid")

    num_segments: int = Field(6, ge=1)
    seasonal_amplitude: float = Field(0.15, ge=0.0)
    event_probability: Union[float, List[float]] = 0.05
    event_magnitude: float = Field(0.15, ge=0.0)
    noise_level: float = Field(0.01, ge=0.0)
    brightness_jitter: float = Field(0.05, ge=0.0, lt=1.0)
    length: int = Field(10, ge=1)
    num_channels: int = Field(4, ge=1)
    num_auxiliary_channels: int = Field(0, ge=0)
    height: int = Field(32, ge=1)
    width: int = Field(32, ge=1)
    revisit_days: int = Field(5, ge=1)
    skip_probability: float = Field(0.3, ge=0.0, le=1.0)
    start_day: int = Field(1, ge=1)
    seed: int = 0

    @field_validator("event_probability")
    @classmethod
    def _probabilities_in_unit_range(cls, value):
        values = value if isinstance(value, list) else [value]
        if any(not 0.0 <= p <= 1.0 for p in values):
            raise ValueError("event probabilities must lie in [0, 1]")
        return value

    @model_validator(mode="after")
    def _check_shapes(self):
        if isinstance(self.event_probability, list) and len(self.event_probability) != self.length:
            raise ValueError(
                f"event_probability lists {len(self.event_probability)} values for {self.length} frames"
            )
        if self.num_segments > self.height * self.width:
            raise ValueError("num_segments exceeds the number of pixels")
        return self

    def event_probabilities(self) -> np.ndarray:
        return np.broadcast_to(
            np.asarray(self.event_probability, dtype=np.float64), (self.length,)
        ).copy()


def _voronoi_segments(
    num_segments: int, height: int, width: int, rng: np.random.Generator
) -> np.ndarray:
    """Label each pixel with its nearest seed point."""
    seeds = np.stack(
        [rng.uniform(0, height, num_segments), rng.uniform(0, width, num_segments)], axis=1
    )
    rows, cols = np.mgrid[0:height, 0:width]
    distances = (rows[..., None] - seeds[:, 0]) ** 2 + (cols[..., None] - seeds[:, 1]) ** 2
    return np.argmin(distances, axis=-1)


def _acquisition_days(params: SyntheticSceneParams, rng: np.random.Generator) -> np.ndarray:
    skips = rng.binomial(2, params.skip_probability, size=params.length)
    steps = params.revisit_days * (1 + skips)
    steps[0] = 0
    return params.start_day + np.cumsum(steps).astype(np.int64)


def generate_synthetic_scene(
    params: SyntheticSceneParams,
    rng: np.random.Generator,
    sample_id: str = "synthetic",
) -> SampleRecord:
    """
    Generate a clean, fully observed scene.

    Each Voronoi segment has a base spectrum, a seasonal sinusoid in the
    acquisition day and at most one abrupt step, drawn at the first frame
    k >= 1 whose uniform draw falls below the event probability of frame k.
    Additive Gaussian noise and a per-frame brightness factor in
    ``[1 - jitter, 1 + jitter]`` are applied before clipping to [0, 1].

    Args:
        params: Scene parameters
        rng: Random generator; equal states give identical scenes
        sample_id: Identifier of the generated record

    Returns:
        SampleRecord with an all-ones mask
    """
    if params.num_segments < 1:
        raise GapSimulationError("A scene needs at least one segment", {"field": "num_segments"})

    length, channels = params.length, params.num_channels
    segments = params.num_segments
    labels = _voronoi_segments(segments, params.height, params.width, rng)
    days = _acquisition_days(params, rng)

    base = rng.uniform(0.05, 0.6, size=(segments, channels))
    amplitude = params.seasonal_amplitude * rng.uniform(0.5, 1.0, size=segments)
    gain = rng.uniform(0.5, 1.0, size=(segments, channels))
    phase = rng.uniform(0.0, 2.0 * np.pi, size=segments)

    season = np.sin(2.0 * np.pi * days[:, None] / DAYS_PER_YEAR + phase[None, :])
    values = base[None] + (amplitude[None, :, None] * gain[None]) * season[:, :, None]

    draws = rng.random(size=(length, segments))
    direction = rng.choice([-1.0, 1.0], size=segments)
    step = direction[:, None] * params.event_magnitude * rng.uniform(0.5, 1.0, size=(segments, channels))
    hits = draws < params.event_probabilities()[:, None]
    hits[0] = False
    event_frames: List[int] = []
    for segment in range(segments):
        frames = np.flatnonzero(hits[:, segment])
        if frames.size:
            values[frames[0]:, segment] += step[segment]
            event_frames.append(int(frames[0]))
        else:
            event_frames.append(-1)

    # (T, S, C) -> (T, C, H, W)
    images = values[:, labels].transpose(0, 3, 1, 2)
    if params.noise_level > 0:
        images = images + rng.normal(0.0, params.noise_level, size=images.shape)
    jitter = rng.uniform(1.0 - params.brightness_jitter, 1.0 + params.brightness_jitter, size=length)
    images = np.clip(images * jitter[:, None, None, None], 0.0, 1.0)

    roles: Tuple[str, ...] = (RECONSTRUCT,) * channels
    if params.num_auxiliary_channels:
        aux_base = rng.uniform(0.2, 0.8, size=(segments, params.num_auxiliary_channels))
        aux = aux_base[labels].transpose(2, 0, 1)[None].repeat(length, axis=0)
        aux = np.clip(aux + rng.normal(0.0, 0.05, size=aux.shape), 0.0, 1.0)
        images = np.concatenate([images, aux], axis=1)
        roles += (AUXILIARY,) * params.num_auxiliary_channels

    return make_record(
        images=images,
        days=days,
        sample_id=sample_id,
        channel_roles=roles,
        metadata={"generator": "synthetic", "event_frames": event_frames},
    )


def generate_blob_mask(
    height: int,
    width: int,
    coverage: float,
    rng: np.random.Generator,
    smoothness: float = 0.0,
    min_blob_pixels: int = 0,
) -> np.ndarray:
    """
    Generate one irregular blob-shaped gap mask.

    Smoothed white noise is thresholded at its ``1 - coverage`` quantile,
    then connected gap regions smaller than ``min_blob_pixels`` are dropped.
    The largest region always survives.

    Args:
        height: Mask height
        width: Mask width
        coverage: Target fraction of gap pixels, strictly between 0 and 1
        rng: Random generator
        smoothness: Gaussian sigma in pixels; 0 picks one eighth of the
            shorter side
        min_blob_pixels: Smallest kept region; 0 picks one 256th of the frame

    Returns:
        uint8 mask of shape (1, H, W), 1 = gap

    Raises:
        GapSimulationError: If coverage is outside (0, 1)
    """
    if not 0.0 < coverage < 1.0:
        raise GapSimulationError(
            f"Blob coverage must lie strictly between 0 and 1, got {coverage}",
            {"field": "coverage"},
        )
    sigma = smoothness or max(1.0, min(height, width) / 8.0)
    field = gaussian_filter(rng.standard_normal((height, width)), sigma=sigma, mode="wrap")
    threshold = np.quantile(field, 1.0 - coverage)
    return _drop_small_regions(field > threshold, min_blob_pixels or max(1, height * width // 256))[None]


def _drop_small_regions(gaps: np.ndarray, min_pixels: int) -> np.ndarray:
    labeled, count = label(gaps)
    if count == 0:
        return gaps.astype(np.uint8)
    sizes = np.bincount(labeled.ravel(), minlength=count + 1)
    sizes[0] = 0
    keep = sizes >= min_pixels
    keep[int(np.argmax(sizes))] = True
    keep[0] = False
    return keep[labeled].astype(np.uint8)


def build_blob_mask_pool(
    count: int,
    height: int,
    width: int,
    coverage_range: Tuple[float, float],
    rng: np.random.Generator,
) -> MaskPool:
    """Build a pool of ``count`` blob masks with coverages drawn from ``coverage_range``."""
    low, high = coverage_range
    coverages = rng.uniform(low, high, size=count)
    masks = np.stack([generate_blob_mask(height, width, c, rng) for c in coverages]) if count else (
        np.zeros((0, 1, height, width), dtype=np.uint8)
    )
    logger.debug(f"Built blob mask pool: {count} masks, coverage {low:.2f}-{high:.2f}")
    return MaskPool(masks=masks, source_tags=("blob",) * count)
