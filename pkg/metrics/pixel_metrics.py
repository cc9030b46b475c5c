"""Pixel-wise reconstruction metrics on (T, C, H, W) volumes.

MAE, RMSE, SAM and PSNR are restricted to a boolean (T, H, W) domain and
averaged over channels; SSIM uses global image statistics per frame and
channel, averaged over channels and then over the selected frames.
"""

import math
from typing import Sequence, Tuple

import numpy as np

from core.exceptions import EmptyDomainError

SSIM_C1 = 0.01**2
SSIM_C2 = 0.03**2


def _domain_values(volume: np.ndarray, domain: np.ndarray) -> np.ndarray:
    """Values inside the domain as an (N, C) float64 array."""
    if volume.ndim != 4 or domain.shape != (volume.shape[0],) + volume.shape[2:]:
        raise ValueError(
            f"Domain of shape {domain.shape} does not match volume of shape {volume.shape}"
        )
    if not domain.any():
        raise EmptyDomainError("Evaluation domain is empty")
    return np.moveaxis(volume, 1, -1)[domain].astype(np.float64)


def mae(prediction: np.ndarray, target: np.ndarray, domain: np.ndarray) -> float:
    """Mean absolute error over the domain and all channels."""
    return float(np.mean(np.abs(_domain_values(prediction, domain) - _domain_values(target, domain))))


def rmse(prediction: np.ndarray, target: np.ndarray, domain: np.ndarray) -> float:
    """Root mean squared error over the domain and all channels."""
    difference = _domain_values(prediction, domain) - _domain_values(target, domain)
    return float(np.sqrt(np.mean(difference**2)))


def psnr_from_rmse(error: float) -> float:
    """PSNR in dB on the unit dynamic range; ``inf`` for a perfect match."""
    if error <= 0.0:
        return math.inf
    return float(20.0 * np.log10(1.0 / error))


def psnr(prediction: np.ndarray, target: np.ndarray, domain: np.ndarray) -> float:
    return psnr_from_rmse(rmse(prediction, target, domain))


def spectral_angles(
    prediction: np.ndarray, target: np.ndarray, domain: np.ndarray
) -> Tuple[np.ndarray, int]:
    """
    Angles in degrees between predicted and reference spectra in the domain.

    Returns:
        Angles of the pixels where both spectra are non-zero, and the number
        of pixels skipped for a zero-norm spectrum
    """
    p = _domain_values(prediction, domain)
    t = _domain_values(target, domain)
    norms = np.linalg.norm(p, axis=1) * np.linalg.norm(t, axis=1)
    usable = norms > 0
    cosine = np.sum(p[usable] * t[usable], axis=1) / norms[usable]
    angles = np.degrees(np.arccos(np.clip(cosine, -1.0, 1.0)))
    return angles, int(np.count_nonzero(~usable))


def sam(prediction: np.ndarray, target: np.ndarray, domain: np.ndarray) -> float:
    """
    Mean spectral angle in degrees.

    Raises:
        EmptyDomainError: No pixel with two non-zero spectra
    """
    angles, _ = spectral_angles(prediction, target, domain)
    if angles.size == 0:
        raise EmptyDomainError("No pixel with non-zero spectra for the spectral angle")
    return float(np.mean(angles))


def ssim(prediction: np.ndarray, target: np.ndarray, frames: Sequence[int]) -> float:
    """
    Structural similarity from global per-image statistics.

    Args:
        prediction: (T, C, H, W) volume
        target: (T, C, H, W) volume
        frames: Frames to average over

    Raises:
        EmptyDomainError: ``frames`` is empty
    """
    index = np.asarray(list(frames), dtype=np.int64)
    if index.size == 0:
        raise EmptyDomainError("No frames to compute SSIM on")
    if prediction.shape != target.shape:
        raise ValueError(f"Shape mismatch: {prediction.shape} vs {target.shape}")

    x = prediction[index].reshape(index.size, prediction.shape[1], -1).astype(np.float64)
    y = target[index].reshape(index.size, target.shape[1], -1).astype(np.float64)
    mu_x, mu_y = x.mean(axis=-1), y.mean(axis=-1)
    var_x, var_y = x.var(axis=-1), y.var(axis=-1)
    covariance = ((x - mu_x[..., None]) * (y - mu_y[..., None])).mean(axis=-1)

    numerator = (2 * mu_x * mu_y + SSIM_C1) * (2 * covariance + SSIM_C2)
    denominator = (mu_x**2 + mu_y**2 + SSIM_C1) * (var_x + var_y + SSIM_C2)
    return float(np.mean(np.mean(numerator / denominator, axis=1)))
