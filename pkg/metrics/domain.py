from dataclasses import dataclass
from typing import Optional

import numpy as np


@dataclass(frozen=True)
class EvalDomain:
    """Pixel and frame sets a sequence is scored on.

    Attributes:
        omega: (T, H, W) missing in the input with a valid reference value
        masked_frames: Frames holding at least one missing pixel
        valid: (T, H, W) observed in the input
    """

    omega: np.ndarray
    masked_frames: np.ndarray
    valid: np.ndarray

    @property
    def num_omega(self) -> int:
        return int(np.count_nonzero(self.omega))

    @property
    def fully_valid_frames(self) -> np.ndarray:
        return np.flatnonzero(self.valid.all(axis=(1, 2)))


def evaluation_domain(
    input_mask: np.ndarray,
    reference_valid: Optional[np.ndarray] = None,
    pad_flags: Optional[np.ndarray] = None,
) -> EvalDomain:
    """
    Derive the scoring domain of one sequence.

    Args:
        input_mask: (T, 1, H, W) or (T, H, W) mask of the imprinted input,
            1 = observed
        reference_valid: (T, H, W) cloud-free map of the reference; all
            valid when omitted, as for synthetic data
        pad_flags: (T,) frames added by padding, excluded everywhere

    Returns:
        EvalDomain
    """
    observed = np.asarray(input_mask).astype(bool)
    if observed.ndim == 4:
        observed = observed[:, 0]
    real = np.ones(observed.shape[0], dtype=bool)
    if pad_flags is not None:
        real = ~np.asarray(pad_flags, dtype=bool)
    real = real[:, None, None]

    gaps = ~observed & real
    reference = np.ones_like(observed) if reference_valid is None else np.asarray(reference_valid, dtype=bool)
    return EvalDomain(
        omega=gaps & reference,
        masked_frames=np.flatnonzero(gaps.any(axis=(1, 2))),
        valid=observed & real,
    )
