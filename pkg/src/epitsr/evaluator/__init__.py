from .metrics import psnr, ssim, gaussian_window, view_metrics
from .report import MetricReport, write_csv, PSNR_CAP, PER_VIEW_COLUMNS, GRID_COLUMNS, SWEEP_COLUMNS
from .scene import evaluate_scene, evaluate_dataset, perspective_grid, crop_to_multiple
from .sweep import shear_sweep, sweep_crop, sweep_extents
from .attention import AttentionDump, attn_dump
from .baselines import BicubicUpsampler


__all__ = [
    "psnr",
    "ssim",
    "gaussian_window",
    "view_metrics",
    "MetricReport",
    "write_csv",
    "PSNR_CAP",
    "PER_VIEW_COLUMNS",
    "GRID_COLUMNS",
    "SWEEP_COLUMNS",
    "evaluate_scene",
    "evaluate_dataset",
    "perspective_grid",
    "crop_to_multiple",
    "shear_sweep",
    "sweep_crop",
    "sweep_extents",
    "AttentionDump",
    "attn_dump",
    "BicubicUpsampler",
]
