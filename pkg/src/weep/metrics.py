"""Reconstruction quality metrics: MSE, MAE, PSNR, and Gaussian-windowed SSIM.

Pure functions; thread-safe."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

__all__ = ["SsimConfig", "mse", "mae", "psnr", "ssim"]


def _pair(ref, est) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(ref, dtype=float)
    b = np.asarray(est, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return a, b


def mse(ref, est) -> float:
    """Mean squared deviation; zero iff the inputs are equal."""
    a, b = _pair(ref, est)
    return float(np.mean((a - b) ** 2))


def mae(ref, est) -> float:
    """Mean absolute deviation; zero iff the inputs are equal."""
    a, b = _pair(ref, est)
    return float(np.mean(np.abs(a - b)))


def psnr(ref, est, max_val: float) -> float:
    """Peak signal-to-noise ratio 10*log10(max_val^2 / MSE) in dB.

    Returns +inf when the inputs coincide exactly.
    """
    if not (np.isfinite(max_val) and max_val > 0.0):
        raise ValueError(f"max_val must be positive, got {max_val!r}")
    err = mse(ref, est)
    if err == 0.0:
        return math.inf
    return 10.0 * math.log10(max_val * max_val / err)


@dataclass(frozen=True)
class SsimConfig:
    """Gaussian-window SSIM settings; defaults are the de facto standard for
    8-bit images (11-tap window, sigma 1.5, k1 = 0.01, k2 = 0.03, range 255).
    """

    window: int = 11
    sigma: float = 1.5
    k1: float = 0.01
    k2: float = 0.03
    dynamic_range: float = 255.0

    def __post_init__(self):
        if self.window < 3 or self.window % 2 == 0:
            raise ValueError(f"window must be odd and >= 3, got {self.window}")
        if not (self.sigma > 0 and self.k1 > 0 and self.k2 > 0 and self.dynamic_range > 0):
            raise ValueError("sigma, k1, k2, dynamic_range must all be positive")


def _gaussian_kernel(window: int, sigma: float) -> np.ndarray:
    # Truncated at the window size and renormalized to sum 1.
    half = window // 2
    coords = np.arange(-half, half + 1, dtype=float)
    g = np.exp(-(coords**2) / (2.0 * sigma * sigma))
    kernel = np.outer(g, g)
    return kernel / kernel.sum()


def ssim(ref, est, cfg: SsimConfig = SsimConfig()) -> float:
    """Mean structural similarity over all fully interior Gaussian windows.

    Symmetric in its two arguments, bounded in [-1, 1], and exactly 1 when
    the inputs coincide.
    """
    a, b = _pair(ref, est)
    if a.ndim != 2:
        raise ValueError(f"ssim expects 2-D images, got shape {a.shape}")
    if min(a.shape) < cfg.window:
        raise ValueError(f"image {a.shape} smaller than window {cfg.window}")
    kernel = _gaussian_kernel(cfg.window, cfg.sigma)

    def windowed_mean(img: np.ndarray) -> np.ndarray:
        views = sliding_window_view(img, (cfg.window, cfg.window))
        return np.tensordot(views, kernel, axes=([2, 3], [0, 1]))

    mu_a = windowed_mean(a)
    mu_b = windowed_mean(b)
    var_a = windowed_mean(a * a) - mu_a * mu_a
    var_b = windowed_mean(b * b) - mu_b * mu_b
    cov = windowed_mean(a * b) - mu_a * mu_b

    c1 = (cfg.k1 * cfg.dynamic_range) ** 2
    c2 = (cfg.k2 * cfg.dynamic_range) ** 2
    ssim_map = ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)) / (
        (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    )
    return float(np.mean(ssim_map))
