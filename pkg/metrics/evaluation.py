import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from core.datamodel import SampleRecord

from .domain import evaluation_domain
from .pixel_metrics import mae, psnr_from_rmse, rmse, spectral_angles, ssim

logger = logging.getLogger(__name__)

METRIC_COLUMNS = ["mae", "rmse", "sam", "psnr", "ssim", "mae_valid", "ssim_valid"]
DETAIL_COLUMNS = [
    "sample_id",
    "method",
    "split",
    "length",
    "num_omega",
    "num_masked_frames",
    "sam_skipped",
    "excluded",
] + METRIC_COLUMNS
LENGTH_BINS = (0, 9, 14, math.inf)
LENGTH_LABELS = ("<=9", "10-14", ">=15")


def evaluate(
    prediction: np.ndarray,
    masked: SampleRecord,
    reference: SampleRecord,
    reference_valid: Optional[np.ndarray] = None,
    method: str = "",
    split: str = "test",
    pad_flags: Optional[np.ndarray] = None,
) -> Dict[str, Any]:
    """
    Score one imputed sequence.

    Pixel metrics use the pixels missing in ``masked`` whose reference value
    is cloud-free; SSIM uses the frames holding missing pixels. MAE and SSIM
    are also reported on the observed pixels (SSIM over frames without any
    missing pixel). Sequences with an empty domain are returned with
    ``excluded`` set and NaN metrics.

    Args:
        prediction: (T, C_out, H, W) output of an imputation method
        masked: The imprinted input
        reference: Clean reference sequence
        reference_valid: (T, H, W) cloud-free map of the reference
        method: Method name for the report
        split: Split tag for the report
        pad_flags: Frames to leave out

    Returns:
        One report row
    """
    target = reference.reconstruct_images()
    if prediction.shape != target.shape:
        raise ValueError(
            f"Prediction of shape {prediction.shape} does not match reference {target.shape}",
        )
    domain = evaluation_domain(masked.mask, reference_valid, pad_flags)
    row: Dict[str, Any] = {
        "sample_id": masked.sample_id,
        "method": method,
        "split": split,
        "length": masked.length if pad_flags is None else int((~np.asarray(pad_flags, bool)).sum()),
        "num_omega": domain.num_omega,
        "num_masked_frames": int(domain.masked_frames.size),
        "sam_skipped": 0,
        "excluded": False,
    }
    row.update({column: math.nan for column in METRIC_COLUMNS})

    if domain.num_omega == 0 or domain.masked_frames.size == 0:
        logger.warning(f"Sample {masked.sample_id} has an empty evaluation domain, excluded")
        row["excluded"] = True
        return row

    angles, skipped = spectral_angles(prediction, target, domain.omega)
    error = rmse(prediction, target, domain.omega)
    row.update(
        {
            "mae": mae(prediction, target, domain.omega),
            "rmse": error,
            "sam": float(np.mean(angles)) if angles.size else math.nan,
            "psnr": psnr_from_rmse(error),
            "ssim": ssim(prediction, target, domain.masked_frames),
            "sam_skipped": skipped,
        }
    )
    if domain.valid.any():
        row["mae_valid"] = mae(prediction, target, domain.valid)
    if domain.fully_valid_frames.size:
        row["ssim_valid"] = ssim(prediction, target, domain.fully_valid_frames)
    return row


def _details(rows: Union[pd.DataFrame, Iterable[Mapping[str, Any]]]) -> pd.DataFrame:
    if isinstance(rows, pd.DataFrame):
        return rows
    return pd.DataFrame(list(rows), columns=DETAIL_COLUMNS)


def _summarize(details: pd.DataFrame, keys: Sequence[str]) -> pd.DataFrame:
    details = details.copy()
    details["excluded"] = details["excluded"].astype(bool)
    details["scored"] = ~details["excluded"]
    scored = details[details["scored"]].copy()
    psnr_values = scored["psnr"].astype(float)
    scored["psnr_infinite"] = np.isinf(psnr_values)
    scored["psnr"] = psnr_values.where(np.isfinite(psnr_values))

    counts = details.groupby(list(keys), sort=False).agg(
        sequences=("scored", "sum"), excluded=("excluded", "sum")
    )
    metrics = scored.groupby(list(keys), sort=False).agg(
        {**{column: "mean" for column in METRIC_COLUMNS}, "psnr_infinite": "sum"}
    )
    summary = metrics.join(counts, how="right")
    summary["psnr_infinite"] = summary["psnr_infinite"].fillna(0).astype(int)
    return summary.reset_index()


def aggregate_report(rows: Union[pd.DataFrame, Iterable[Mapping[str, Any]]]) -> pd.DataFrame:
    """
    Summarize per-sequence rows by (method, split).

    Metrics are means of per-sequence values. PSNR averages finite values
    only; ``psnr_infinite`` counts perfect reconstructions.
    """
    return _summarize(_details(rows), ("method", "split"))


def aggregate_by_length(
    rows: Union[pd.DataFrame, Iterable[Mapping[str, Any]]],
    bins: Tuple[float, ...] = LENGTH_BINS,
    labels: Tuple[str, ...] = LENGTH_LABELS,
) -> pd.DataFrame:
    """Summarize per-sequence rows by (method, sequence length bin)."""
    details = _details(rows).copy()
    details["length_bin"] = pd.cut(details["length"], bins=list(bins), labels=list(labels)).astype(str)
    return _summarize(details, ("method", "length_bin"))


@dataclass
class EvalReport:
    """Per-sequence rows and their (method, split) summary."""

    details: pd.DataFrame
    summary: pd.DataFrame

    @classmethod
    def from_rows(cls, rows: Iterable[Mapping[str, Any]]) -> "EvalReport":
        details = _details(rows)
        return cls(details=details, summary=aggregate_report(details))

    def metric(self, method: str, column: str = "mae", split: Optional[str] = None) -> float:
        selected = self.summary[self.summary["method"] == method]
        if split is not None:
            selected = selected[selected["split"] == split]
        return float(selected[column].mean())


def write_report(report: EvalReport, out_dir: Union[str, Path]) -> Dict[str, Path]:
    """
    Write ``summary.csv``, ``details.csv`` and ``by_length.csv``.

    Returns:
        Mapping of table name to written path
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "summary": out_dir / "summary.csv",
        "details": out_dir / "details.csv",
        "by_length": out_dir / "by_length.csv",
    }
    report.summary.to_csv(paths["summary"], index=False)
    report.details.to_csv(paths["details"], index=False)
    aggregate_by_length(report.details).to_csv(paths["by_length"], index=False)
    logger.info(f"Wrote evaluation report of {len(report.details)} rows to {out_dir}")
    return paths
