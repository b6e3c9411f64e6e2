"""Deterministic synthetic image corpora.

BSD68 is not redistributed, so benchmarks and tests run on these
generated grayscale images (plus any user-supplied directory). Two sets:
a mixed corpus of gradients, shapes and random fields, and a fine-texture
corpus whose structure sits well above the PR kernel scale, used by the
noise-profiling experiment.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

DEFAULT_CORPUS_SEED = 20240801
TEXTURE_CORPUS_SEED = 20240802


def _minmax(im: np.ndarray) -> np.ndarray:
    lo, hi = im.min(), im.max()
    return (im - lo) / (hi - lo)


def make_default_corpus(size: int = 64) -> list:
    """Ten mixed synthetic images in [0, 1], reproducible."""
    rng = np.random.default_rng(DEFAULT_CORPUS_SEED)
    yy, xx = np.mgrid[0:size, 0:size] / (size - 1)
    imgs = []
    imgs.append(xx)  # ramp
    imgs.append(0.5 + 0.5 * np.sin(2 * np.pi * (3 * xx + 1.5 * yy)))
    r = np.hypot(xx - 0.5, yy - 0.35)
    imgs.append(np.clip(1.0 - 3 * r, 0, 1))  # cone blob
    imgs.append(((xx * 8).astype(int) + (yy * 8).astype(int)) % 2 * 0.8 + 0.1)
    disc = (np.hypot(xx - 0.3, yy - 0.6) < 0.2) * 0.9
    sq = ((np.abs(xx - 0.7) < 0.15) & (np.abs(yy - 0.3) < 0.15)) * 0.6
    imgs.append(np.clip(0.1 + disc + sq, 0, 1))  # shapes
    t = ndimage.gaussian_filter(rng.standard_normal((size, size)), 2.0)
    imgs.append(_minmax(t))  # smooth random field
    sp = ndimage.gaussian_filter(rng.standard_normal((size, size)), 0.7)
    imgs.append(_minmax(sp))  # speckle texture
    bars = 0.5 + 0.5 * np.sign(np.sin(14 * np.pi * xx)) * (yy < 0.7) - 0.25 * (yy >= 0.7)
    imgs.append(np.clip(bars, 0, 1))
    rings = 0.5 + 0.5 * np.cos(24 * r)
    imgs.append(rings * np.clip(1.2 - r, 0, 1))
    gl = np.clip(xx * 0.6 + 0.4 * (np.hypot(xx - 0.75, yy - 0.75) < 0.18), 0, 1)
    imgs.append(gl)  # gradient + bright disc
    return [np.clip(im, 0, 1).astype(float) for im in imgs]


def make_texture_corpus(size: int = 32) -> list:
    """Ten fine-texture images squeezed into [0.2, 0.8].

    The squeeze keeps additive noise mostly unclipped, and the fine
    structure keeps min-max normalization after PR filtering from
    injecting image content into the residual.
    """
    rng = np.random.default_rng(TEXTURE_CORPUS_SEED)
    yy, xx = np.mgrid[0:size, 0:size] / (size - 1)
    imgs = []
    imgs.append(((np.floor(xx * 8) + np.floor(yy * 8)) % 2))  # checker 8
    imgs.append(((np.floor(xx * 16) + np.floor(yy * 16)) % 2))  # checker 16
    imgs.append(0.5 + 0.5 * np.sin(2 * np.pi * (8 * xx + 4 * yy)))  # diagonal grating
    imgs.append(0.5 + 0.5 * np.sin(2 * np.pi * 8 * xx) * np.sin(2 * np.pi * 8 * yy))  # plaid
    for s in (0.6, 0.6, 0.5):
        t = ndimage.gaussian_filter(rng.standard_normal((size, size)), s)
        imgs.append(_minmax(t))  # speckle
    imgs.append((np.floor(xx * 16) % 2))  # fine bars
    imgs.append(0.5 + 0.5 * np.sin(2 * np.pi * 10 * yy))  # horizontal grating
    imgs.append((np.floor(xx * 12) % 2) * (np.floor(yy * 12) % 2))  # dot grid
    return [0.2 + 0.6 * np.clip(im, 0, 1).astype(float) for im in imgs]
