"""Image quality metrics on [0, 1] grayscale arrays.

PSNR uses peak 1.0, so psnr = -10 log10(MSE); a zero-MSE pair maps to +inf.
SSIM follows the standard single-scale formulation: 11x11 Gaussian window
with sigma 1.5, K1 = 0.01, K2 = 0.03, dynamic range L = 1, statistics taken
over valid (fully inside) windows only and averaged.

metric_mode="8bit" quantizes both images to uint8 levels first and measures
on the dequantized values, mirroring file-format-constrained evaluation;
"float" measures the arrays as given.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

_WIN_SIZE = 11
_WIN_SIGMA = 1.5
_K1 = 0.01
_K2 = 0.03


def _check_pair(ref, test):
    ref = np.asarray(ref, dtype=float)
    test = np.asarray(test, dtype=float)
    if ref.shape != test.shape:
        raise ValueError(f"shape mismatch: {ref.shape} vs {test.shape}")
    return ref, test


def quantize8(img: np.ndarray) -> np.ndarray:
    """Round to the 256-level grid used by 8-bit formats."""
    return np.round(np.clip(img, 0.0, 1.0) * 255.0) / 255.0


def _mode(img, metric_mode):
    if metric_mode == "float":
        return img
    if metric_mode == "8bit":
        return quantize8(img)
    raise ValueError(f"unknown metric_mode {metric_mode!r}")


def psnr(ref: np.ndarray, test: np.ndarray, metric_mode: str = "float") -> float:
    ref, test = _check_pair(ref, test)
    ref = _mode(ref, metric_mode)
    test = _mode(test, metric_mode)
    mse = np.mean((ref - test) ** 2)
    if mse == 0.0:
        return float("inf")
    return float(-10.0 * np.log10(mse))


def _gaussian_window() -> np.ndarray:
    half = _WIN_SIZE // 2
    x = np.arange(-half, half + 1, dtype=float)
    g = np.exp(-(x ** 2) / (2.0 * _WIN_SIGMA ** 2))
    win = np.outer(g, g)
    return win / win.sum()


_WINDOW = _gaussian_window()


def _valid_filter(img: np.ndarray) -> np.ndarray:
    half = _WIN_SIZE // 2
    full = ndimage.correlate(img, _WINDOW, mode="constant", cval=0.0)
    return full[half:-half, half:-half]


def ssim(ref: np.ndarray, test: np.ndarray, metric_mode: str = "float") -> float:
    ref, test = _check_pair(ref, test)
    if ref.shape[0] < _WIN_SIZE or ref.shape[1] < _WIN_SIZE:
        raise ValueError(f"images must be at least {_WIN_SIZE}x{_WIN_SIZE} for SSIM")
    ref = _mode(ref, metric_mode)
    test = _mode(test, metric_mode)
    c1 = _K1 ** 2
    c2 = _K2 ** 2
    mu_x = _valid_filter(ref)
    mu_y = _valid_filter(test)
    xx = _valid_filter(ref * ref) - mu_x * mu_x
    yy = _valid_filter(test * test) - mu_y * mu_y
    xy = _valid_filter(ref * test) - mu_x * mu_y
    num = (2.0 * mu_x * mu_y + c1) * (2.0 * xy + c2)
    den = (mu_x ** 2 + mu_y ** 2 + c1) * (xx + yy + c2)
    return float(np.mean(num / den))
