"""Reconstruction metrics and evaluation reports."""

from .domain import EvalDomain, evaluation_domain
from .evaluation import (
    EvalReport,
    aggregate_by_length,
    aggregate_report,
    evaluate,
    write_report,
)
from .pixel_metrics import mae, psnr, psnr_from_rmse, rmse, sam, spectral_angles, ssim

__all__ = [
    "EvalDomain",
    "evaluation_domain",
    "EvalReport",
    "aggregate_by_length",
    "aggregate_report",
    "evaluate",
    "write_report",
    "mae",
    "psnr",
    "psnr_from_rmse",
    "rmse",
    "sam",
    "spectral_angles",
    "ssim",
]
