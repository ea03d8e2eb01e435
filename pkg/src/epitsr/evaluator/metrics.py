import math
from functools import lru_cache

import numpy as np
from scipy.signal import correlate2d

from ..errors import ShapeMismatchError


SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def _pair(a: np.ndarray, b: np.ndarray, op: str):
    a, b = np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeMismatchError(f"`{op}` needs equal shapes, got {a.shape} and {b.shape}.")
    return a, b


def psnr(a: np.ndarray, b: np.ndarray, peak: float = 1.0) -> float:
    r"""`10 log10(peak^2 / MSE)` in dB; identical inputs give `inf`."""
    a, b = _pair(a, b, "psnr")
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(peak ** 2 / mse)


@lru_cache(maxsize=8)
def gaussian_window(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    offsets = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    g = np.exp(-(offsets ** 2) / (2.0 * sigma ** 2))
    window = np.outer(g, g)
    window /= window.sum()
    window.setflags(write=False)
    return window


def ssim(a: np.ndarray, b: np.ndarray, data_range: float = 1.0) -> float:
    r"""
    Single-scale SSIM of two single-channel images: 11x11 Gaussian window with
    sigma 1.5, K1 = 0.01, K2 = 0.03, averaged over the valid window positions.
    """
    a, b = _pair(a, b, "ssim")
    if a.ndim == 3 and a.shape[2] == 1:
        a, b = a[..., 0], b[..., 0]
    if a.ndim != 2:
        raise ShapeMismatchError(f"`ssim` works on single-channel 2-D images, got shape {a.shape}.")
    window = gaussian_window()
    if a.shape[0] < window.shape[0] or a.shape[1] < window.shape[1]:
        raise ShapeMismatchError(f"Image of {a.shape[0]}x{a.shape[1]} is smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} SSIM window.")

    c1 = (SSIM_K1 * data_range) ** 2
    c2 = (SSIM_K2 * data_range) ** 2
    mu_a = correlate2d(a, window, mode="valid")
    mu_b = correlate2d(b, window, mode="valid")
    var_a = correlate2d(a * a, window, mode="valid") - mu_a * mu_a
    var_b = correlate2d(b * b, window, mode="valid") - mu_b * mu_b
    cov = correlate2d(a * b, window, mode="valid") - mu_a * mu_b
    numerator = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
    denominator = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    return float(np.mean(numerator / denominator))


def view_metrics(hr: np.ndarray, sr: np.ndarray, shave: int = 0):
    r"""PSNR and SSIM of one `(H, W, C)` view pair; SSIM is averaged over channels."""
    if shave:
        hr, sr = hr[shave:-shave, shave:-shave], sr[shave:-shave, shave:-shave]
    value = psnr(hr, sr)
    structural = float(np.mean([ssim(hr[..., c], sr[..., c]) for c in range(hr.shape[2])]))
    return value, structural
