import logging
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

import numpy as np

from core.base_imputer import ImputationResult
from core.datamodel import RECONSTRUCT, SampleRecord, make_record
from gapsim.gaps import trim_or_pad
from models.network import TemporalAttentionUNet, forward_record
from providers.filesystem_sample_store import save_sample

from .windows import plan_windows

logger = logging.getLogger(__name__)


def _forward_padded(
    model: TemporalAttentionUNet, record: SampleRecord, window_length: int
) -> tuple:
    trimmed = trim_or_pad(record, window_length, mode="eval")
    prediction, attention = forward_record(model, trimmed.record)
    return prediction[: record.length], attention


def impute_sequence(
    model: TemporalAttentionUNet, record: SampleRecord, window_length: int
) -> ImputationResult:
    """
    Impute a full-length imprinted sequence with the network.

    Sequences shorter than the window are padded for the forward pass and
    the pad outputs discarded; longer ones are split according to
    :func:`plan_windows` and every frame is gathered from its assigned
    window.

    Args:
        model: Trained network
        record: Imprinted record of any length
        window_length: Training window length

    Returns:
        ImputationResult with values (T, C_out, H, W), one attention volume
        per window and the window plan in ``metadata``
    """
    plan = plan_windows(record.length, window_length)
    height, width = record.spatial_size
    values = np.empty(
        (record.length, model.config.output_channels, height, width), dtype=np.float32
    )
    attention = []
    for index, (start, end) in enumerate(plan.windows):
        window = record.select_frames(range(start, end))
        prediction, window_attention = _forward_padded(model, window, window_length)
        frames = plan.frames_of(index)
        values[frames] = prediction[[t - start for t in frames]]
        attention.append(window_attention)

    logger.debug(
        f"Imputed {record.sample_id} ({record.length} frames) in {plan.num_windows} window(s)"
    )
    return ImputationResult(values=values, attention=attention, metadata={"window_plan": plan.as_dict()})


def save_imputed(
    record: SampleRecord,
    result: ImputationResult,
    path: Union[str, Path],
    provenance: Optional[Mapping[str, Any]] = None,
) -> Path:
    """
    Write an imputed sequence in the sample container format.

    Args:
        record: The imprinted input the result was computed from
        result: Imputation output
        path: Sample directory
        provenance: Method name, checkpoint id, window plan and similar

    Returns:
        Path of the written sample directory
    """
    return save_sample(imputed_record(record, result, provenance), path)


def imputed_record(
    record: SampleRecord,
    result: ImputationResult,
    provenance: Optional[Mapping[str, Any]] = None,
) -> SampleRecord:
    """
    Package an imputation result as a record.

    Only the reconstruct channels are kept; the mask is all valid except for
    pixels the method could not fill. ``provenance`` and the result's own
    metadata are stored under ``metadata["provenance"]``.
    """
    mask = np.ones((record.length, 1) + record.spatial_size, dtype=np.uint8)
    if result.unfilled is not None:
        mask[:, 0, result.unfilled] = 0
    metadata: Dict[str, Any] = dict(record.metadata)
    metadata["provenance"] = dict(provenance or {})
    metadata["provenance"].update(result.metadata)
    return make_record(
        np.clip(result.values, 0.0, 1.0),
        record.days,
        record.sample_id,
        mask=mask,
        channel_roles=(RECONSTRUCT,) * result.values.shape[1],
        metadata=metadata,
    )

