"""Classic spatial filter baselines.

All filters take and return [0, 1] grayscale arrays, pad by edge
replication, and clamp the result back to [0, 1]. "average" is the 3x3 box
and "mean" the 5x5 box; the two names are kept distinct because the
benchmark tables list them as separate rows.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

ADAPTIVE_MAX_WINDOW = 7


def _prep(img) -> np.ndarray:
    img = np.asarray(img, dtype=float)
    if img.ndim != 2:
        raise ValueError("image must be 2-D grayscale")
    return img


def _check_ksize(img: np.ndarray, ksize: int) -> None:
    if ksize < 3 or ksize % 2 == 0:
        raise ValueError("kernel size must be odd and >= 3")
    if ksize > min(img.shape):
        raise ValueError(
            f"kernel size {ksize} exceeds image extent {min(img.shape)}"
        )


def _clamp(img: np.ndarray) -> np.ndarray:
    return np.clip(img, 0.0, 1.0)


def box_filter(img, ksize: int) -> np.ndarray:
    img = _prep(img)
    _check_ksize(img, ksize)
    return _clamp(ndimage.uniform_filter(img, size=ksize, mode="nearest"))


def average_filter(img) -> np.ndarray:
    return box_filter(img, 3)


def mean_filter(img) -> np.ndarray:
    return box_filter(img, 5)


def gaussian_kernel(sigma: float, ksize: int) -> np.ndarray:
    """Point-sampled isotropic 2-D Gaussian, normalized to sum 1."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if ksize < 1 or ksize % 2 == 0:
        raise ValueError("ksize must be odd and positive")
    x = np.arange(ksize, dtype=float) - ksize // 2
    g = np.exp(-(x ** 2) / (2.0 * sigma ** 2))
    k = np.outer(g, g)
    return k / k.sum()


def gaussian_filter(img, sigma: float = 2.0, ksize: int = 9) -> np.ndarray:
    img = _prep(img)
    _check_ksize(img, ksize)
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    x = np.arange(ksize, dtype=float) - ksize // 2
    g = np.exp(-(x ** 2) / (2.0 * sigma ** 2))
    g /= g.sum()
    # separable passes; replicate extension commutes with the split
    out = ndimage.correlate1d(img, g, axis=0, mode="nearest")
    out = ndimage.correlate1d(out, g, axis=1, mode="nearest")
    return _clamp(out)


def median_filter(img, ksize: int = 3) -> np.ndarray:
    img = _prep(img)
    _check_ksize(img, ksize)
    return _clamp(ndimage.median_filter(img, size=ksize, mode="nearest"))


def max_filter(img, ksize: int = 3) -> np.ndarray:
    img = _prep(img)
    _check_ksize(img, ksize)
    return _clamp(ndimage.maximum_filter(img, size=ksize, mode="nearest"))


def min_filter(img, ksize: int = 3) -> np.ndarray:
    img = _prep(img)
    _check_ksize(img, ksize)
    return _clamp(ndimage.minimum_filter(img, size=ksize, mode="nearest"))


def adaptive_median_filter(img, max_window: int = ADAPTIVE_MAX_WINDOW) -> np.ndarray:
    """Two-stage adaptive median (window grows while the median is an extreme).

    Stage A: if med lies strictly between the window min and max, go to
    stage B, else enlarge the window and repeat; once the window budget is
    exhausted, output med. Stage B: keep the center pixel if it is strictly
    between min and max, else output med.
    """
    img = _prep(img)
    _check_ksize(img, max_window)
    h, w = img.shape
    windows = list(range(3, max_window + 1, 2))
    out = np.empty_like(img)
    decided = np.zeros((h, w), dtype=bool)
    med = img
    for k in windows:
        med = ndimage.median_filter(img, size=k, mode="nearest")
        lo = ndimage.minimum_filter(img, size=k, mode="nearest")
        hi = ndimage.maximum_filter(img, size=k, mode="nearest")
        stage_b = (~decided) & (lo < med) & (med < hi)
        keep = stage_b & (lo < img) & (img < hi)
        out[keep] = img[keep]
        out[stage_b & ~keep] = med[stage_b & ~keep]
        decided |= stage_b
    out[~decided] = med[~decided]
    return _clamp(out)


@dataclass(frozen=True)
class FilterKind:
    """Tagged baseline selector, e.g. FilterKind("gaussian", {"sigma": 2})."""

    tag: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.tag not in FILTERS:
            raise ValueError(f"unknown filter {self.tag!r}")


def apply(img, kind: FilterKind) -> np.ndarray:
    return FILTERS[kind.tag](img, **kind.params)


# registry used by the benchmark and the CLI --filter flag
FILTERS = {
    "average": lambda img, **kw: average_filter(img),
    "mean": lambda img, **kw: mean_filter(img),
    "gaussian": lambda img, sigma=2.0, ksize=9, **kw: gaussian_filter(img, sigma, ksize),
    "median": lambda img, ksize=3, **kw: median_filter(img, ksize),
    "adaptive_median": lambda img, max_window=ADAPTIVE_MAX_WINDOW, **kw: adaptive_median_filter(img, max_window),
    "max": lambda img, ksize=3, **kw: max_filter(img, ksize),
    "min": lambda img, ksize=3, **kw: min_filter(img, ksize),
}
