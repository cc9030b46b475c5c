import math

import torch

from .config import PositionalEncodingMode

DAYS_PER_YEAR = 365


def day_values(days: torch.Tensor, mode: PositionalEncodingMode) -> torch.Tensor:
    """
    Derive the day argument of the encoding from stored day numbers.

    Args:
        days: Integer tensor (..., T) of day numbers
        mode: ``day_of_year`` wraps day numbers past 366 back into the year,
            ``day_in_sequence`` counts from the first frame, ``enumeration``
            uses 0..T-1 and ``none`` yields zeros

    Returns:
        Float tensor of the same shape
    """
    days = days.to(torch.float64)
    if mode == "day_of_year":
        wrapped = torch.remainder(days - 1, DAYS_PER_YEAR) + 1
        return torch.where(days > 366, wrapped, days)
    if mode == "day_in_sequence":
        return days - days[..., :1]
    if mode == "enumeration":
        steps = torch.arange(days.shape[-1], dtype=torch.float64, device=days.device)
        return steps.expand_as(days)
    if mode == "none":
        return torch.zeros_like(days)
    raise ValueError(f"Unknown positional encoding mode: {mode}")


def positional_encoding(
    days: torch.Tensor, dim: int, tau: float = 1000.0, mode: PositionalEncodingMode = "day_of_year"
) -> torch.Tensor:
    """
    Sinusoidal encoding of acquisition days.

    ``PE[t, k] = sin(day(t) / tau^(2k/dim) + (pi/2) * (k mod 2))``; mode
    ``none`` returns a zero matrix.

    Args:
        days: Integer tensor (..., T)
        dim: Encoding width
        tau: Wavelength base
        mode: See :func:`day_values`

    Returns:
        float32 tensor (..., T, dim)
    """
    if mode == "none":
        return torch.zeros(*days.shape, dim, dtype=torch.float32, device=days.device)
    values = day_values(days, mode)
    k = torch.arange(dim, dtype=torch.float64, device=days.device)
    denominator = torch.pow(torch.tensor(tau, dtype=torch.float64), 2.0 * k / dim)
    phase = (math.pi / 2.0) * torch.remainder(k, 2)
    return torch.sin(values[..., None] / denominator + phase).to(torch.float32)
